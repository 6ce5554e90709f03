//! Risk-tier classification against the prohibited / high-risk taxonomy.
//!
//! Rules are evaluated in order and the first one that fires decides the level:
//!
//! | rule | condition                                        | level        |
//! |------|--------------------------------------------------|--------------|
//! | R1   | an intended area matches a prohibited practice   | Unacceptable |
//! | R2   | the system is a safety component of a product    | High         |
//! | R3   | an intended area matches a high-risk area        | High         |
//! | R4   | at least one affective capability is declared    | Transparency |
//! | R5   | otherwise                                        | Minimal      |
//!
//! Misuses never change the level. A misuse whose area matches the taxonomy is
//! reported as a flag and as a warning diagnostic.

mod taxonomy;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use taxonomy::{builtin_taxonomy, match_area, top_level_area, Taxonomy, TaxonomyEntry, Tier};

use crate::error::{Error, Result};
use crate::model::{has_errors, validate_with, Diagnostic, RiskLevel, UseCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
}

impl Rule {
    fn title(self) -> &'static str {
        match self {
            Rule::R1 => "prohibited practice",
            Rule::R2 => "safety component",
            Rule::R3 => "high-risk area",
            Rule::R4 => "transparency",
            Rule::R5 => "minimal risk",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaMatch {
    pub area_id: String,
    pub tier: Tier,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisuseFlag {
    pub misuse_index: usize,
    pub description: String,
    pub area_id: String,
    pub tier: Tier,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: Rule,
    pub fired: bool,
    pub detail: String,
}

impl fmt::Display for RuleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.rule, self.rule.title(), self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskAssessment {
    pub level: RiskLevel,
    /// Taxonomy entries matched by intended application areas, in area order.
    pub matched: Vec<AreaMatch>,
    pub misuse_flags: Vec<MisuseFlag>,
    /// Every rule consulted, in evaluation order; the last one fired.
    pub rationale: Vec<RuleOutcome>,
}

impl RiskAssessment {
    pub fn deciding_rule(&self) -> Rule {
        self.rationale
            .iter()
            .find(|o| o.fired)
            .map_or(Rule::R5, |o| o.rule)
    }

    pub fn matched_tier(&self, tier: Tier) -> impl Iterator<Item = &AreaMatch> {
        self.matched.iter().filter(move |m| m.tier == tier)
    }

    /// One `risk.misuse_flag` warning per flagged misuse.
    pub fn warnings(&self) -> Vec<Diagnostic> {
        self.misuse_flags
            .iter()
            .map(|flag| {
                Diagnostic::warning(
                    "risk.misuse_flag",
                    format!("misuses[{}]", flag.misuse_index),
                    format!(
                        "documented misuse falls under {} `{}` ({})",
                        flag.tier, flag.area_id, flag.label
                    ),
                )
            })
            .collect()
    }
}

/// Classifies a valid use case. Invalid input is rejected with its diagnostics.
pub fn classify(uc: &UseCase, taxonomy: &Taxonomy) -> Result<RiskAssessment> {
    let diagnostics = validate_with(uc, taxonomy);
    if has_errors(&diagnostics) {
        return Err(Error::ValidationFailed(diagnostics));
    }

    let mut matched: Vec<AreaMatch> = Vec::new();
    for area in &uc.application_areas {
        if let Some(entry) = match_area(area, taxonomy) {
            if !matched.iter().any(|m| m.area_id == entry.area_id) {
                matched.push(AreaMatch {
                    area_id: entry.area_id.clone(),
                    tier: entry.tier,
                    label: entry.label(),
                });
            }
        }
    }

    let misuse_flags = uc
        .misuses
        .iter()
        .enumerate()
        .filter_map(|(i, misuse)| {
            let entry = match_area(misuse.area_ref.as_ref()?, taxonomy)?;
            Some(MisuseFlag {
                misuse_index: i,
                description: misuse.description.trim().to_string(),
                area_id: entry.area_id.clone(),
                tier: entry.tier,
                label: entry.label(),
            })
        })
        .collect();

    let ids = |tier: Tier| -> Vec<String> {
        matched
            .iter()
            .filter(|m| m.tier == tier)
            .map(|m| m.area_id.clone())
            .collect()
    };
    let prohibited = ids(Tier::Prohibited);
    let high = ids(Tier::HighRisk);

    let candidates = [
        (
            Rule::R1,
            !prohibited.is_empty(),
            RiskLevel::Unacceptable,
            if prohibited.is_empty() {
                "no intended area is a prohibited practice".to_string()
            } else {
                format!("intended area(s) {} are prohibited practices", prohibited.join(", "))
            },
        ),
        (
            Rule::R2,
            uc.safety_component,
            RiskLevel::High,
            if uc.safety_component {
                "the system is a safety component of a product".to_string()
            } else {
                "not a safety component of a product".to_string()
            },
        ),
        (
            Rule::R3,
            !high.is_empty(),
            RiskLevel::High,
            if high.is_empty() {
                "no intended area is a high-risk area".to_string()
            } else {
                format!("intended area(s) {} are high-risk areas", high.join(", "))
            },
        ),
        (
            Rule::R4,
            !uc.affective_capabilities.is_empty(),
            RiskLevel::Transparency,
            if uc.affective_capabilities.is_empty() {
                "no affective capability declared".to_string()
            } else {
                format!(
                    "affective capabilities declared: {}",
                    uc.affective_capabilities.join(", ")
                )
            },
        ),
        (
            Rule::R5,
            true,
            RiskLevel::Minimal,
            "no other rule applies".to_string(),
        ),
    ];

    let mut rationale = Vec::new();
    let mut level = RiskLevel::Minimal;
    for (rule, fired, rule_level, detail) in candidates {
        rationale.push(RuleOutcome { rule, fired, detail });
        if fired {
            level = rule_level;
            break;
        }
    }

    Ok(RiskAssessment {
        level,
        matched,
        misuse_flags,
        rationale,
    })
}

/// Human-readable report: the level, one line per reason of the deciding
/// rule, the consulted rules, and one `WARNING:` line per misuse flag.
pub fn explain(assessment: &RiskAssessment) -> String {
    let mut lines = vec![format!("Risk level: {}", assessment.level)];
    let rule = assessment.deciding_rule();
    match rule {
        Rule::R1 | Rule::R3 => {
            let tier = if rule == Rule::R1 {
                Tier::Prohibited
            } else {
                Tier::HighRisk
            };
            for m in assessment.matched_tier(tier) {
                lines.push(format!("{rule} {}: {} ({})", rule.title(), m.label, m.area_id));
            }
        }
        _ => {
            if let Some(outcome) = assessment.rationale.iter().find(|o| o.fired) {
                lines.push(outcome.to_string());
            }
        }
    }
    let consulted: Vec<String> = assessment
        .rationale
        .iter()
        .map(|o| format!("{} {}", o.rule, if o.fired { "fired" } else { "no" }))
        .collect();
    lines.push(format!("Consulted: {}", consulted.join(", ")));
    for flag in &assessment.misuse_flags {
        lines.push(format!(
            "WARNING: misuse \"{}\" falls under {} area {} ({})",
            flag.description, flag.tier, flag.label, flag.area_id
        ));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests;

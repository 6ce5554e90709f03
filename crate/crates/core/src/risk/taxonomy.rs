use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ApplicationAreaRef, RiskLevel};
use crate::ucdl::{Failed, PResult, ParseError, Parser, TokenKind};

const BUILTIN_SOURCE: &str = include_str!("../../data/builtin.taxonomy");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    HighRisk,
    Prohibited,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Prohibited => "prohibited",
            Tier::HighRisk => "high_risk",
        }
    }

    pub fn level(self) -> RiskLevel {
        match self {
            Tier::Prohibited => RiskLevel::Unacceptable,
            Tier::HighRisk => RiskLevel::High,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub area_id: String,
    pub tier: Tier,
    pub area_label: String,
    pub sub_use_label: String,
    pub keywords: Vec<String>,
}

impl TaxonomyEntry {
    /// `"<area> > <sub-use>"`
    pub fn label(&self) -> String {
        format!("{} > {}", self.area_label, self.sub_use_label)
    }

    /// Part of the id before the first dot.
    pub fn top_level(&self) -> &str {
        top_level_area(&self.area_id)
    }
}

pub fn top_level_area(area_id: &str) -> &str {
    area_id.split('.').next().unwrap_or(area_id)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    pub version: String,
    entries: Vec<TaxonomyEntry>,
}

impl Taxonomy {
    pub fn new(version: impl Into<String>, entries: Vec<TaxonomyEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for entry in &entries {
            if !seen.insert(entry.area_id.as_str()) {
                return Err(Error::Taxonomy(format!("duplicate area id `{}`", entry.area_id)));
            }
            if entry.area_id == crate::model::OTHER_AREA {
                return Err(Error::Taxonomy("`other` is reserved".into()));
            }
            if let Some(bad) = entry.keywords.iter().find(|k| k.to_lowercase() != **k || k.trim().is_empty()) {
                return Err(Error::Taxonomy(format!(
                    "keyword `{bad}` of `{}` must be lowercase and non-empty",
                    entry.area_id
                )));
            }
        }
        Ok(Taxonomy {
            version: version.into(),
            entries,
        })
    }

    pub fn entries(&self) -> &[TaxonomyEntry] {
        &self.entries
    }

    pub fn get(&self, area_id: &str) -> Option<&TaxonomyEntry> {
        self.entries.iter().find(|e| e.area_id == area_id)
    }

    pub fn by_tier(&self, tier: Tier) -> impl Iterator<Item = &TaxonomyEntry> {
        self.entries.iter().filter(move |e| e.tier == tier)
    }

    /// Distinct top-level areas of one tier, in declaration order.
    pub fn top_level_areas(&self, tier: Tier) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for entry in self.by_tier(tier) {
            if !out.contains(&entry.top_level()) {
                out.push(entry.top_level());
            }
        }
        out
    }

    /// Reads the `entry <area_id> { ... }` taxonomy format.
    pub fn parse(source: &str) -> std::result::Result<Taxonomy, Vec<ParseError>> {
        let mut p = Parser::new(source);
        let mut version = None;
        let mut entries = Vec::new();
        while !p.at_eof() {
            let parsed = if p.is_ident("version") {
                parse_version(&mut p).map(|v| version = Some(v))
            } else {
                parse_entry(&mut p).map(|e| entries.push(e))
            };
            if parsed.is_err() {
                // Resume at the next `entry` keyword.
                while !p.at_eof() && !(p.depth() == 0 && (p.is_ident("entry") || p.is_ident("version"))) {
                    p.bump();
                }
            }
        }
        if !p.errors.is_empty() {
            return Err(p.errors);
        }
        Taxonomy::new(version.unwrap_or_else(|| "custom".into()), entries).map_err(|e| {
            vec![ParseError {
                span: crate::ucdl::SourceSpan {
                    line: 1,
                    column: 1,
                    length: 0,
                },
                message: e.to_string(),
                expected: Vec::new(),
                code: "taxonomy.invalid".into(),
            }]
        })
    }
}

fn parse_version(p: &mut Parser) -> PResult<String> {
    p.expect_keyword("version")?;
    p.expect(TokenKind::Colon, ":")?;
    p.string()
}

fn parse_entry(p: &mut Parser) -> PResult<TaxonomyEntry> {
    p.expect_keyword("entry")?;
    let area_id = p.word()?;
    p.expect(TokenKind::LBrace, "{")?;
    let mut tier = None;
    let mut area = None;
    let mut sub_use = None;
    let mut keywords = None;
    while !p.at_close("field")? {
        let span = p.span();
        let key = p.ident()?;
        p.expect(TokenKind::Colon, ":")?;
        let duplicate = match key.as_str() {
            "tier" => {
                let tspan = p.span();
                let word = p.ident()?;
                let parsed = match word.as_str() {
                    "prohibited" => Tier::Prohibited,
                    "high_risk" => Tier::HighRisk,
                    _ => {
                        p.error_at(
                            tspan,
                            "value.invalid",
                            format!("unknown tier `{word}`"),
                            &["prohibited", "high_risk"],
                        );
                        return Err(Failed);
                    }
                };
                tier.replace(parsed).is_some()
            }
            "area" => area.replace(p.string()?).is_some(),
            "sub_use" => sub_use.replace(p.string()?).is_some(),
            "keywords" => keywords.replace(p.list(Parser::reference)?).is_some(),
            _ => {
                p.error_at(
                    span,
                    "field.unknown",
                    format!("unknown taxonomy field `{key}`"),
                    &["tier", "area", "sub_use", "keywords"],
                );
                return Err(Failed);
            }
        };
        if duplicate {
            p.error_at(span, "field.duplicate", format!("field `{key}` is given more than once"), &[]);
        }
    }
    let close = p.span();
    p.bump();
    match (tier, area, sub_use) {
        (Some(tier), Some(area_label), Some(sub_use_label)) => Ok(TaxonomyEntry {
            area_id,
            tier,
            area_label,
            sub_use_label,
            keywords: keywords.unwrap_or_default(),
        }),
        _ => {
            p.error_at(
                close,
                "field.missing",
                format!("entry `{area_id}` needs tier, area and sub_use"),
                &["tier", "area", "sub_use"],
            );
            Err(Failed)
        }
    }
}

/// The shipped encoding of the prohibited practices and high-risk areas.
pub fn builtin_taxonomy() -> &'static Taxonomy {
    static BUILTIN: OnceLock<Taxonomy> = OnceLock::new();
    BUILTIN.get_or_init(|| {
        Taxonomy::parse(BUILTIN_SOURCE).expect("built-in taxonomy data must parse")
    })
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty() && haystack.windows(phrase.len()).any(|w| w == phrase)
}

/// Resolves an area reference to a taxonomy entry.
///
/// Taxonomy ids match exactly. `other(label)` refs match an entry whose id
/// equals the label, else by whole-word keyword search; among keyword hits the
/// higher tier wins, then the larger number of matched keywords, then
/// declaration order.
pub fn match_area<'t>(area: &ApplicationAreaRef, taxonomy: &'t Taxonomy) -> Option<&'t TaxonomyEntry> {
    if !area.is_other() {
        return taxonomy.get(&area.area_id);
    }
    let label = area.free_label.as_deref()?.trim();
    if let Some(exact) = taxonomy.get(label) {
        return Some(exact);
    }
    let label_words = words(label);
    let mut best: Option<(&TaxonomyEntry, usize)> = None;
    for entry in taxonomy.entries() {
        let hits = entry
            .keywords
            .iter()
            .filter(|k| contains_phrase(&label_words, &words(k)))
            .count();
        if hits == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, bh)) => (entry.tier, hits) > (b.tier, bh),
        };
        if better {
            best = Some((entry, hits));
        }
    }
    best.map(|(entry, _)| entry)
}

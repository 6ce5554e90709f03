use proptest::prelude::*;

use super::*;
use crate::fixtures::fixture;
use crate::model::{tests::minimal, ApplicationAreaRef, Misuse};
use crate::ucdl::parse_document;

fn load(name: &str) -> UseCase {
    let (mut ucs, errors) = parse_document(fixture(name).unwrap());
    assert!(errors.is_empty(), "{errors:?}");
    ucs.remove(0)
}

fn assess(uc: &UseCase) -> RiskAssessment {
    classify(uc, builtin_taxonomy()).unwrap()
}

fn with_area(area: ApplicationAreaRef) -> UseCase {
    let mut uc = minimal();
    uc.application_areas = vec![area];
    uc
}

#[test]
fn smart_camera() {
    let a = assess(&load("smart_camera"));
    assert_eq!(a.level, RiskLevel::Transparency);
    assert_eq!(a.deciding_rule(), Rule::R4);
    assert_eq!(a.misuse_flags.len(), 1);
    assert_eq!(a.misuse_flags[0].area_id, "employment.monitor_performance");
    assert_eq!(a.misuse_flags[0].tier, Tier::HighRisk);
    assert!(a.matched.is_empty());
    let warnings = a.warnings();
    assert_eq!(warnings.len(), 1);
    assert_eq!(warnings[0].code, "risk.misuse_flag");
}

#[test]
fn driver_monitoring() {
    let a = assess(&load("driver_monitoring"));
    assert_eq!(a.level, RiskLevel::High);
    assert_eq!(a.deciding_rule(), Rule::R2);
    assert!(a.misuse_flags.is_empty());
    assert!(explain(&a).contains("safety component"));
}

#[test]
fn music_recommender() {
    let a = assess(&load("music_recommender"));
    assert_eq!(a.level, RiskLevel::Transparency);
    assert_eq!(a.misuse_flags.len(), 1);
    assert_eq!(a.misuse_flags[0].tier, Tier::Prohibited);
    assert_eq!(a.misuse_flags[0].area_id, "exploit_vulnerabilities.distort_behaviour");
}

#[test]
fn rule_examples() {
    let a = assess(&with_area(ApplicationAreaRef::taxonomy("law_enforcement.detect_emotional_state")));
    assert_eq!((a.level, a.deciding_rule()), (RiskLevel::High, Rule::R3));
    let a = assess(&with_area(ApplicationAreaRef::taxonomy("social_scoring.social_behaviour")));
    assert_eq!((a.level, a.deciding_rule()), (RiskLevel::Unacceptable, Rule::R1));
    let a = assess(&with_area(ApplicationAreaRef::other("spreadsheet autofill")));
    assert_eq!((a.level, a.deciding_rule()), (RiskLevel::Minimal, Rule::R5));
    let mut uc = with_area(ApplicationAreaRef::other("visa application emotion screening"));
    uc.affective_capabilities = vec!["emotion_recognition".into()];
    let a = assess(&uc);
    assert_eq!(a.level, RiskLevel::High);
    assert_eq!(a.matched[0].area_id, "migration_border.examine_applications");
}

#[test]
fn rationale_lists_consulted_rules_in_order() {
    let a = assess(&with_area(ApplicationAreaRef::taxonomy("education.assess_students")));
    let rules: Vec<Rule> = a.rationale.iter().map(|o| o.rule).collect();
    assert_eq!(rules, [Rule::R1, Rule::R2, Rule::R3]);
    assert_eq!(a.rationale.iter().filter(|o| o.fired).count(), 1);
}

#[test]
fn all_prohibited_matches_reported() {
    let mut uc = minimal();
    uc.application_areas = vec![
        ApplicationAreaRef::taxonomy("social_scoring.social_behaviour"),
        ApplicationAreaRef::taxonomy("subliminal_techniques.distort_behaviour"),
        ApplicationAreaRef::taxonomy("education.assess_students"),
    ];
    let a = assess(&uc);
    assert_eq!(a.level, RiskLevel::Unacceptable);
    assert_eq!(a.matched_tier(Tier::Prohibited).count(), 2);
    let text = explain(&a);
    assert_eq!(text.lines().filter(|l| l.starts_with("R1 ")).count(), 2);
}

#[test]
fn explain_minimal_has_one_rule_line() {
    let text = explain(&assess(&minimal()));
    assert!(text.starts_with("Risk level: Minimal\n"));
    let rule_lines: Vec<&str> = text.lines().filter(|l| l.starts_with('R') && !l.starts_with("Risk")).collect();
    assert_eq!(rule_lines, ["R5 minimal risk: no other rule applies"]);
}

#[test]
fn explain_counts_warnings() {
    let mut uc = minimal();
    for area in ["employment.recruitment", "social_scoring.predicted_personality"] {
        uc.misuses.push(Misuse {
            description: format!("misused for {area}"),
            area_ref: Some(ApplicationAreaRef::taxonomy(area)),
        });
    }
    let a = assess(&uc);
    assert_eq!(a.level, RiskLevel::Minimal);
    assert_eq!(explain(&a).lines().filter(|l| l.starts_with("WARNING:")).count(), 2);
}

#[test]
fn invalid_use_case_is_rejected() {
    let mut uc = minimal();
    uc.application_areas = vec![ApplicationAreaRef::taxonomy("astrology")];
    assert!(matches!(classify(&uc, builtin_taxonomy()), Err(Error::ValidationFailed(_))));
}

#[test]
fn custom_taxonomy_changes_outcome() {
    let tax = Taxonomy::parse(
        r#"version: "t1"
        entry leisure.photography { tier: high_risk area: "Leisure" sub_use: "Photography" keywords: [leisure] }"#,
    )
    .unwrap();
    let uc = with_area(ApplicationAreaRef::other("leisure photography"));
    assert_eq!(assess(&uc).level, RiskLevel::Minimal);
    let a = classify(&uc, &tax).unwrap();
    assert_eq!(a.level, RiskLevel::High);
    assert!(classify(&load("smart_camera"), &tax).is_err());
    assert!(classify(&uc, &tax).is_ok_and(|b| b == a));
}

/// Tier of an area by direct scan: exact id, else any whole-word keyword
/// phrase in the label. `Some(true)` is prohibited, `Some(false)` high-risk.
pub(crate) fn oracle_tier(area: &ApplicationAreaRef, tax: &Taxonomy) -> Option<bool> {
    let key = if area.is_other() {
        area.free_label.clone().unwrap_or_default()
    } else {
        area.area_id.clone()
    };
    if let Some(e) = tax.entries().iter().find(|e| e.area_id == key.trim()) {
        return Some(e.tier == Tier::Prohibited);
    }
    if !area.is_other() {
        return None;
    }
    let normalise = |s: &str| {
        let spaced: String = s
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect::<String>()
            .to_lowercase();
        format!(" {} ", spaced.split_whitespace().collect::<Vec<_>>().join(" "))
    };
    let label = normalise(&key);
    let mut best = None;
    for e in tax.entries() {
        if e.keywords.iter().any(|k| label.contains(&normalise(k))) {
            let prohibited = e.tier == Tier::Prohibited;
            best = Some(best.unwrap_or(false) || prohibited);
        }
    }
    best
}

pub(crate) fn oracle_level(uc: &UseCase, tax: &Taxonomy) -> RiskLevel {
    let tiers: Vec<bool> = uc.application_areas.iter().filter_map(|a| oracle_tier(a, tax)).collect();
    let candidates = [
        (tiers.contains(&true), RiskLevel::Unacceptable),
        (uc.safety_component || tiers.contains(&false), RiskLevel::High),
        (!uc.affective_capabilities.is_empty(), RiskLevel::Transparency),
    ];
    candidates
        .iter()
        .filter(|(hit, _)| *hit)
        .map(|(_, level)| *level)
        .max()
        .unwrap_or(RiskLevel::Minimal)
}

fn any_area() -> impl Strategy<Value = ApplicationAreaRef> {
    let ids: Vec<String> = builtin_taxonomy().entries().iter().map(|e| e.area_id.clone()).collect();
    prop_oneof![
        proptest::sample::select(ids).prop_map(ApplicationAreaRef::taxonomy),
        "[a-z ]{1,12}( (exams|hiring|visa|social credit|subliminal|credit score))?"
            .prop_map(|l| ApplicationAreaRef::other(l.trim().to_string()))
            .prop_filter("label", |a| !a.free_label.as_deref().unwrap_or("").is_empty()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matches_oracle(uc in crate::testkit::use_case()) {
        let a = classify(&uc, builtin_taxonomy()).unwrap();
        prop_assert_eq!(a.level, oracle_level(&uc, builtin_taxonomy()));
        if a.level == RiskLevel::Unacceptable {
            prop_assert!(a.matched_tier(Tier::Prohibited).count() >= 1);
        }
        if a.level == RiskLevel::High {
            prop_assert!(uc.safety_component || a.matched_tier(Tier::HighRisk).count() >= 1);
        }
        if uc.safety_component {
            prop_assert!(a.level >= RiskLevel::High);
        }
        prop_assert_eq!(&a, &classify(&uc, builtin_taxonomy()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn adding_an_area_never_lowers_risk(uc in crate::testkit::use_case(), area in any_area()) {
        let before = classify(&uc, builtin_taxonomy()).unwrap().level;
        let mut more = uc.clone();
        more.application_areas.push(area);
        let after = classify(&more, builtin_taxonomy()).unwrap().level;
        prop_assert!(after >= before);
    }

    #[test]
    fn misuses_never_change_level(uc in crate::testkit::use_case(), areas in proptest::collection::vec(proptest::option::of(any_area()), 0..4)) {
        let before = classify(&uc, builtin_taxonomy()).unwrap();
        let mut edited = uc.clone();
        edited.misuses = areas
            .into_iter()
            .enumerate()
            .map(|(i, area_ref)| Misuse { description: format!("misuse {i}"), area_ref })
            .collect();
        let after = classify(&edited, builtin_taxonomy()).unwrap();
        prop_assert_eq!(after.level, before.level);
        prop_assert_eq!(after.matched, before.matched);
        prop_assert_eq!(after.misuse_flags.len(), edited.misuses.iter().filter(|m| m.area_ref.as_ref().is_some_and(|a| oracle_tier(a, builtin_taxonomy()).is_some())).count());
    }
}

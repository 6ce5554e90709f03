use std::path::PathBuf;

use ucdoc_core::catalog::{build_catalog, export_json};
use ucdoc_core::diagram::{build_diagram, layout, render_svg, render_textual, LayoutConfig};
use ucdoc_core::docgen::render_table_markdown;
use ucdoc_core::fixtures::FIXTURES;
use ucdoc_core::risk::Tier;
use ucdoc_core::{builtin_taxonomy, classify, parse_document, serialize_canonical, RiskLevel, UseCase};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares against a frozen file. `UCDOC_BLESS=1` writes missing goldens.
fn check_golden(name: &str, actual: &[u8]) {
    let path = golden_dir().join(name);
    if !path.exists() && std::env::var_os("UCDOC_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert!(expected == actual, "{name} differs from its golden file");
}

fn load(source: &str) -> UseCase {
    let (mut ucs, errors) = parse_document(source);
    assert!(errors.is_empty(), "{errors:#?}");
    assert_eq!(ucs.len(), 1);
    ucs.remove(0)
}

#[test]
fn fixture_levels_and_flags() {
    let expected = [
        ("driver_monitoring.ucdl", RiskLevel::High, None),
        ("music_recommender.ucdl", RiskLevel::Transparency, Some(Tier::Prohibited)),
        ("smart_camera.ucdl", RiskLevel::Transparency, Some(Tier::HighRisk)),
    ];
    for ((name, source), (exp_name, level, flag)) in FIXTURES.iter().zip(expected) {
        assert_eq!(*name, exp_name);
        let a = classify(&load(source), builtin_taxonomy()).unwrap();
        assert_eq!(a.level, level, "{name}");
        let flags: Vec<Tier> = a.misuse_flags.iter().map(|f| f.tier).collect();
        assert_eq!(flags, flag.into_iter().collect::<Vec<_>>(), "{name}");
    }
}

#[test]
fn golden_svgs() {
    for (name, source) in FIXTURES {
        let (d, _) = build_diagram(&load(source)).unwrap();
        let svg = render_svg(&layout(&d, &LayoutConfig::default()));
        let again = render_svg(&layout(&d, &LayoutConfig::default()));
        assert_eq!(svg, again);
        check_golden(&name.replace(".ucdl", ".svg"), &svg);
    }
}

#[test]
fn golden_plantuml() {
    for (name, source) in FIXTURES {
        let (d, _) = build_diagram(&load(source)).unwrap();
        check_golden(&name.replace(".ucdl", ".puml"), render_textual(&d).as_bytes());
    }
}

#[test]
fn golden_tables() {
    for (name, source) in FIXTURES {
        let uc = load(source);
        let a = classify(&uc, builtin_taxonomy()).unwrap();
        let md = render_table_markdown(&uc, Some(&a)).unwrap();
        check_golden(&name.replace(".ucdl", ".md"), md.as_bytes());
    }
}

#[test]
fn golden_canonical_sources() {
    for (name, source) in FIXTURES {
        let text = serialize_canonical(&load(source)).unwrap();
        check_golden(&name.replace(".ucdl", ".canonical.ucdl"), text.as_bytes());
    }
}

#[test]
fn golden_catalog_export() {
    let sources: Vec<(String, String)> = FIXTURES.iter().map(|(p, t)| (p.to_string(), t.to_string())).collect();
    let (cat, _) = build_catalog(&sources, builtin_taxonomy());
    check_golden("catalog.json", &export_json(&cat));
}

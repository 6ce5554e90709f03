//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use ucdoc_core::diagram::{build_diagram, layout, render_svg, LayoutConfig, PositionedDiagram, Rect};
use ucdoc_core::docgen::{render_html_page, render_table_markdown};
use ucdoc_core::fixtures::fixture;
use ucdoc_core::model::{ApplicationAreaRef, Misuse, RiskLevel, UseCase};
use ucdoc_core::risk::{Tier, TaxonomyEntry};
use ucdoc_core::{builtin_taxonomy, classify, parse_document, serialize_canonical, testkit, Taxonomy};

type Outcome = Result<String, String>;

fn runner(seed: u8) -> TestRunner {
    TestRunner::new_with_rng(Config::default(), TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// Draws `n` values from a strategy with a fixed seed.
fn sample<S: Strategy>(strategy: S, n: usize, seed: u8) -> Vec<S::Value> {
    let mut r = runner(seed);
    (0..n)
        .map(|_| strategy.new_tree(&mut r).expect("strategy").current())
        .collect()
}

fn within(started: Instant, limit: Duration) -> Result<Duration, String> {
    let took = started.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    }
}

fn load(name: &str) -> Result<UseCase, String> {
    let (mut ucs, errors) = parse_document(fixture(name).ok_or("no such fixture")?);
    if !errors.is_empty() || ucs.len() != 1 {
        return Err(format!("{name}: {} use cases, errors {errors:?}", ucs.len()));
    }
    Ok(ucs.remove(0))
}

const FIXTURE_NAMES: [&str; 3] = ["smart_camera", "music_recommender", "driver_monitoring"];

fn fixture_fidelity() -> Outcome {
    let started = Instant::now();
    let expected = [
        ("smart_camera", RiskLevel::Transparency, Some(Tier::HighRisk)),
        ("music_recommender", RiskLevel::Transparency, Some(Tier::Prohibited)),
        ("driver_monitoring", RiskLevel::High, None),
    ];
    for (name, level, flag) in expected {
        let uc = load(name)?;
        let a = classify(&uc, builtin_taxonomy()).map_err(|e| format!("{name}: {e}"))?;
        let flags: Vec<Tier> = a.misuse_flags.iter().map(|f| f.tier).collect();
        if a.level != level || flags != flag.into_iter().collect::<Vec<_>>() {
            return Err(format!("{name}: got {} with flags {flags:?}", a.level));
        }
        if name == "driver_monitoring" && !(uc.safety_component && a.matched.is_empty()) {
            return Err("driver monitoring is not High through the safety component alone".into());
        }
    }
    let took = within(started, Duration::from_secs(1))?;
    Ok(format!("3/3 fixtures as expected in {took:.2?}"))
}

/// The prohibited (top) and high-risk (bottom) halves of the reference table.
const PROHIBITED: [(&str, &[&str]); 3] = [
    (
        "Deploy subliminal techniques beyond a person's consciousness",
        &["Distort a person's behaviour to cause psychological harm"],
    ),
    (
        "Exploit the vulnerabilities of a specific group of persons",
        &["Distort a person's behaviour to cause psychological harm"],
    ),
    (
        "Social scoring by public authorities or on their behalf",
        &[
            "Evaluation of trustworthiness based on predicted personality",
            "Evaluation of trustworthiness based on social behaviour",
        ],
    ),
];

const HIGH_RISK: [(&str, &[&str]); 6] = [
    (
        "Education and vocational training",
        &["Determine access to educational institutions", "Assess students in educational institutions"],
    ),
    (
        "Employment, workers management and access to self-employment",
        &[
            "Recruitment or selection of natural persons",
            "Make decisions on promotion/termination of contract",
            "Monitoring and evaluation of performance and behaviour",
        ],
    ),
    (
        "Access to essential private/public services and benefits",
        &[
            "Evaluate eligibility of natural persons for public assistance",
            "Evaluate creditworthiness of natural persons",
            "Establish priority in the dispatching of emergency services",
        ],
    ),
    (
        "Law enforcement",
        &[
            "Make individual risk assessments of natural persons",
            "Detect the emotional state of a natural person",
            "Crime profiling of natural persons",
        ],
    ),
    (
        "Migration, asylum and border control management",
        &[
            "Make individual risk assessments of natural persons",
            "Detect the emotional state of a natural person",
            "Examine applications for asylum/visa/residence",
        ],
    ),
    (
        "Administration of justice and democratic processes",
        &["Assist judicial authority in researching and interpreting facts"],
    ),
];

fn taxonomy_completeness() -> Outcome {
    let tax = builtin_taxonomy();
    let pairs = |tier: Tier| -> Vec<(String, String)> {
        tax.by_tier(tier)
            .map(|e: &TaxonomyEntry| (e.area_label.clone(), e.sub_use_label.clone()))
            .collect()
    };
    let flatten = |table: &[(&str, &[&str])]| -> Vec<(String, String)> {
        table
            .iter()
            .flat_map(|(area, subs)| subs.iter().map(move |s| (area.to_string(), s.to_string())))
            .collect()
    };
    let (prohibited, high) = (flatten(&PROHIBITED), flatten(&HIGH_RISK));
    if (prohibited.len(), high.len()) != (4, 15) {
        return Err("reference table transcription is off".into());
    }
    if pairs(Tier::Prohibited) != prohibited {
        return Err(format!("prohibited entries differ: {:?}", pairs(Tier::Prohibited)));
    }
    if pairs(Tier::HighRisk) != high {
        return Err(format!("high-risk entries differ: {:?}", pairs(Tier::HighRisk)));
    }
    if tax.entries().len() != 19 {
        return Err(format!("{} entries, expected 19", tax.entries().len()));
    }
    let areas = (tax.top_level_areas(Tier::Prohibited).len(), tax.top_level_areas(Tier::HighRisk).len());
    if areas != (3, 6) {
        return Err(format!("top-level areas {areas:?}, expected (3, 6)"));
    }
    Ok("3 prohibited areas / 4 sub-uses, 6 high-risk areas / 15 sub-uses".into())
}

fn parser_round_trip() -> Outcome {
    let started = Instant::now();
    let cases = sample(testkit::use_case(), 1000, 3);
    let mut failures = 0;
    let mut first = None;
    for uc in &cases {
        let text = serialize_canonical(uc).map_err(|e| e.to_string())?;
        let parsed = parse_document(&text);
        let ok = parsed == (vec![uc.clone()], vec![])
            && serialize_canonical(&parsed.0[0]).map(|again| again == text).unwrap_or(false);
        if !ok {
            failures += 1;
            first.get_or_insert(text);
        }
    }
    if let Some(text) = first {
        return Err(format!("{failures} of {} failed; first:\n{text}", cases.len()));
    }
    let took = within(started, Duration::from_secs(30))?;
    Ok(format!("{} use cases, 0 failures in {took:.2?}", cases.len()))
}

/// Lower-case alphanumeric words of `text`, space-joined and space-padded.
fn words(text: &str) -> String {
    let spaced: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    format!(" {} ", spaced.split_whitespace().collect::<Vec<_>>().join(" "))
}

/// Highest tier any entry assigns to the area, by exact id or keyword phrase.
fn oracle_area_tier(area: &ApplicationAreaRef, tax: &Taxonomy) -> Option<Tier> {
    let rank = |t: Tier| matches!(t, Tier::Prohibited) as u8;
    let mut best: Option<Tier> = None;
    for e in tax.entries() {
        let hit = match &area.free_label {
            None => e.area_id == area.area_id,
            Some(label) => {
                let label = words(label);
                e.area_id == label.trim() || e.keywords.iter().any(|k| label.contains(&words(k)))
            }
        };
        if hit && best.is_none_or(|b| rank(e.tier) > rank(b)) {
            best = Some(e.tier);
        }
    }
    best
}

fn oracle_level(uc: &UseCase, tax: &Taxonomy) -> RiskLevel {
    let tiers: Vec<Tier> = uc.application_areas.iter().filter_map(|a| oracle_area_tier(a, tax)).collect();
    if tiers.contains(&Tier::Prohibited) {
        RiskLevel::Unacceptable
    } else if uc.safety_component || tiers.contains(&Tier::HighRisk) {
        RiskLevel::High
    } else if !uc.affective_capabilities.is_empty() {
        RiskLevel::Transparency
    } else {
        RiskLevel::Minimal
    }
}

fn classifier_oracle() -> Outcome {
    let tax = builtin_taxonomy();
    let ids: Vec<String> = tax.entries().iter().map(|e| e.area_id.clone()).collect();
    let extra = (
        proptest::sample::select(ids),
        proptest::bool::ANY,
        "[a-z ]{0,10}(hiring|exam|visa|social credit|credit score|subliminal)?",
    )
        .prop_map(|(id, known, label)| {
            if known {
                ApplicationAreaRef::taxonomy(id)
            } else {
                ApplicationAreaRef::other(format!("x {}", label.trim()))
            }
        });
    let cases = sample((testkit::use_case(), extra), 10_000, 4);
    let (mut disagree, mut lowered, mut shifted) = (0, 0, 0);
    for (uc, area) in &cases {
        let a = classify(uc, tax).map_err(|e| e.to_string())?;
        if a.level != oracle_level(uc, tax) {
            disagree += 1;
        }
        let mut more = uc.clone();
        more.application_areas.push(area.clone());
        if classify(&more, tax).map_err(|e| e.to_string())?.level < a.level {
            lowered += 1;
        }
        let mut edited = uc.clone();
        edited.misuses.push(Misuse {
            description: "added misuse".into(),
            area_ref: Some(area.clone()),
        });
        edited.misuses.rotate_right(1);
        if classify(&edited, tax).map_err(|e| e.to_string())?.level != a.level {
            shifted += 1;
        }
        edited.misuses.clear();
        if classify(&edited, tax).map_err(|e| e.to_string())?.level != a.level {
            shifted += 1;
        }
    }
    if disagree + lowered + shifted > 0 {
        return Err(format!(
            "oracle disagreements {disagree}, monotonicity violations {lowered}, misuse-invariance violations {shifted}"
        ));
    }
    Ok(format!("{} use cases, 0 counterexamples", cases.len()))
}

fn inside(outer: &Rect, inner: &Rect) -> bool {
    outer.x < inner.x && outer.y < inner.y && inner.x + inner.w < outer.x + outer.w && inner.y + inner.h < outer.y + outer.h
}

fn disjoint(a: &Rect, b: &Rect) -> bool {
    a.x + a.w <= b.x || b.x + b.w <= a.x || a.y + a.h <= b.y || b.y + b.h <= a.y
}

fn geometry_fault(p: &PositionedDiagram) -> Option<String> {
    let ellipses: Vec<Rect> = (0..p.ellipse_centers.len()).map(|i| p.ellipse_box(i)).collect();
    let actors: Vec<Rect> = (0..p.actor_centers.len()).map(|i| p.actor_box(i)).collect();
    if let Some(i) = ellipses.iter().position(|e| !inside(&p.boundary, e)) {
        return Some(format!("ellipse {i} not inside the boundary"));
    }
    if let Some(i) = actors.iter().position(|a| !disjoint(&p.boundary, a)) {
        return Some(format!("actor {i} touches the boundary"));
    }
    let boxes: Vec<&Rect> = ellipses.iter().chain(&actors).collect();
    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i + 1..] {
            if !disjoint(a, b) {
                return Some(format!("overlap between {a:?} and {b:?}"));
            }
        }
    }
    None
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn diagram_geometry() -> Outcome {
    let config = LayoutConfig::default();
    for uc in sample(testkit::use_case(), 500, 5) {
        let (d, _) = build_diagram(&uc).map_err(|e| e.to_string())?;
        let p = layout(&d, &config);
        if let Some(fault) = geometry_fault(&p) {
            return Err(format!("{}: {fault}", uc.id));
        }
        if render_svg(&p) != render_svg(&layout(&d, &config)) {
            return Err(format!("{}: SVG differs between runs", uc.id));
        }
    }
    for name in FIXTURE_NAMES {
        let (d, _) = build_diagram(&load(name)?).map_err(|e| e.to_string())?;
        let svg = render_svg(&layout(&d, &config));
        let golden = std::fs::read(golden_dir().join(format!("{name}.svg"))).map_err(|e| format!("{name}.svg: {e}"))?;
        if svg != golden {
            return Err(format!("{name}: SVG differs from the golden file"));
        }
    }
    Ok("500 diagrams well placed and reproducible, 3/3 goldens identical".into())
}

fn docgen_labels() -> Outcome {
    let renamed = ["Intended purpose", "User", "Target persons", "Misuses", "Application areas"];
    let originals = ["Scope", "Primary Actor", "Stakeholders and Interests", "Open issues"];
    for name in FIXTURE_NAMES {
        let uc = load(name)?;
        let a = classify(&uc, builtin_taxonomy()).map_err(|e| e.to_string())?;
        let md = render_table_markdown(&uc, Some(&a)).map_err(|e| e.to_string())?;
        let html = render_html_page(&uc, Some(&a), None).map_err(|e| e.to_string())?;
        for (format, text) in [("md", &md), ("html", &html)] {
            let cells: Vec<String> = match format {
                "md" => renamed.iter().map(|l| format!("| {l} |")).collect(),
                _ => renamed.iter().map(|l| format!("<th>{l}</th>")).collect(),
            };
            if let Some(missing) = cells.iter().find(|c| !text.contains(c.as_str())) {
                return Err(format!("{name}.{format}: missing `{missing}`"));
            }
            if let Some(old) = originals.iter().find(|o| text.contains(*o)) {
                return Err(format!("{name}.{format}: contains `{old}`"));
            }
        }
    }
    Ok("5 renamed labels present, 4 originals absent, in md and html for 3 fixtures".into())
}

fn ucdoc(args: &[&str]) -> Result<(i32, String, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ucdoc"))
        .args(args)
        .env_remove("UCDOC_TAXONOMY")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    ))
}

fn end_to_end_cli() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let catalog = dir.path().join("catalog.json");
    let (fixtures, catalog) = (fixtures.to_str().unwrap_or_default(), catalog.to_str().unwrap_or_default());

    let (code, _, err) = ucdoc(&["catalog", "build", fixtures, "--out", catalog])?;
    if code != 0 {
        return Err(format!("catalog build exited {code}: {err}"));
    }
    let (code, out, _) = ucdoc(&["catalog", "stats", catalog])?;
    if code != 0 || !out.contains("Transparency=2") || !out.contains("High=1") {
        return Err(format!("catalog stats exited {code}: {out}"));
    }
    let (code, out, _) = ucdoc(&["catalog", "query", catalog, "--risk", "High"])?;
    let ids: Vec<&str> = out.lines().filter_map(|l| l.split('\t').next()).collect();
    if code != 0 || ids != ["driver-monitoring"] {
        return Err(format!("catalog query --risk High exited {code} with ids {ids:?}"));
    }

    let broken = dir.path().join("broken.ucdl");
    std::fs::write(&broken, "usecase \"Broken\" {\n  id: broken\n").map_err(|e| e.to_string())?;
    let missing = dir.path().join("missing.ucdl");
    let faults: [(&str, Vec<&str>, i32); 4] = [
        ("missing file", vec!["validate", missing.to_str().unwrap_or_default()], 3),
        ("parse error", vec!["validate", broken.to_str().unwrap_or_default()], 2),
        ("unknown flag", vec!["validate", "--no-such-flag", fixtures], 3),
        ("unknown subcommand", vec!["frobnicate"], 3),
    ];
    for (fault, args, expected) in &faults {
        let (code, _, err) = ucdoc(args)?;
        if code != *expected || err.is_empty() {
            return Err(format!("{fault}: exit {code}, expected {expected}; stderr {err:?}"));
        }
    }
    let (code, _, _) = ucdoc(&["--strict", "validate", fixtures])?;
    if code != 1 {
        return Err(format!("--strict with misuse warnings exited {code}, expected 1"));
    }
    let took = within(started, Duration::from_secs(5))?;
    Ok(format!("stats and query as expected, 5 fault exit codes correct, in {took:.2?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("fixture fidelity", fixture_fidelity),
        ("taxonomy completeness", taxonomy_completeness),
        ("parser round-trip", parser_round_trip),
        ("classifier oracle equivalence", classifier_oracle),
        ("diagram geometry", diagram_geometry),
        ("docgen label contract", docgen_labels),
        ("end-to-end CLI", end_to_end_cli),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {}. {name}: {reason}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

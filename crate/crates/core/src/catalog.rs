//! In-memory catalogue of classified use cases with filtering, statistics
//! and a JSON snapshot format.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{canonicalize_with, has_errors, validate_with, ActorKind, Diagnostic, RiskLevel, UseCase};
use crate::risk::{classify, top_level_area, RiskAssessment, Taxonomy};
use crate::ucdl::parse_document;

pub const SCHEMA: &str = "ucdoc-catalog/1";

/// Fields computed at build time rather than authored.
pub const GENERATED_FIELDS: [&str; 2] = ["risk_level", "assessment"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub use_case: UseCase,
    pub assessment: RiskAssessment,
    pub source_path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    taxonomy: Taxonomy,
}

/// Conjunctive filters; `None` matches everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Query {
    pub risk_level: Option<RiskLevel>,
    /// A taxonomy entry id or a top-level area such as `employment`.
    pub area_id: Option<String>,
    pub capability: Option<String>,
    pub actor_kind: Option<ActorKind>,
    /// Case-insensitive substring of the title or intended purpose.
    pub free_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub total: usize,
    /// Every level, including those with no entries.
    pub by_level: BTreeMap<RiskLevel, usize>,
    /// Top-level areas of matched intended areas; an entry counts once per area.
    pub by_area: BTreeMap<String, usize>,
    pub by_capability: BTreeMap<String, usize>,
}

impl Catalog {
    pub fn empty(taxonomy: &Taxonomy) -> Self {
        Catalog {
            entries: Vec::new(),
            taxonomy: taxonomy.clone(),
        }
    }

    /// Entries in id order.
    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CatalogEntry> {
        self.entries
            .binary_search_by(|e| e.use_case.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.entries[i])
    }
}

/// Parses, validates, canonicalizes and classifies every source. Bad files
/// contribute diagnostics (locations prefixed with the path) and are
/// otherwise skipped. When two use cases share an id the first one in source
/// order is kept.
pub fn build_catalog(sources: &[(String, String)], taxonomy: &Taxonomy) -> (Catalog, Vec<Diagnostic>) {
    let mut entries: BTreeMap<String, CatalogEntry> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for (path, text) in sources {
        let (use_cases, errors) = parse_document(text);
        diagnostics.extend(errors.iter().map(|e| e.to_diagnostic().with_location_prefix(path)));
        for uc in use_cases {
            let prefix = format!("{path}:{}", uc.id);
            let found = validate_with(&uc, taxonomy);
            let invalid = has_errors(&found);
            diagnostics.extend(found.into_iter().map(|d| d.with_location_prefix(&prefix)));
            if invalid {
                continue;
            }
            let Ok(uc) = canonicalize_with(&uc, taxonomy) else { continue };
            let assessment = match classify(&uc, taxonomy) {
                Ok(a) => a,
                Err(e) => {
                    diagnostics.push(Diagnostic::error("catalog.classify_failed", prefix, e.to_string()));
                    continue;
                }
            };
            diagnostics.extend(assessment.warnings().into_iter().map(|d| d.with_location_prefix(&prefix)));
            if let Some(first) = entries.get(&uc.id) {
                diagnostics.push(Diagnostic::error(
                    "catalog.duplicate_id",
                    prefix,
                    format!("id `{}` is already used by {}", uc.id, first.source_path),
                ));
                continue;
            }
            entries.insert(
                uc.id.clone(),
                CatalogEntry {
                    use_case: uc,
                    assessment,
                    source_path: path.clone(),
                },
            );
        }
    }
    let catalog = Catalog {
        entries: entries.into_values().collect(),
        taxonomy: taxonomy.clone(),
    };
    (catalog, diagnostics)
}

/// Collects `.ucdl` files below `dir`, recursively, in sorted path order.
pub fn read_sources(dir: &Path) -> std::io::Result<Vec<(String, String)>> {
    fn walk(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.extension().is_some_and(|e| e == "ucdl") {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut paths = Vec::new();
    walk(dir, &mut paths)?;
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p)?;
            let shown = p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            Ok((shown, text))
        })
        .collect()
}

fn area_known(taxonomy: &Taxonomy, area_id: &str) -> bool {
    taxonomy.get(area_id).is_some() || taxonomy.entries().iter().any(|e| e.top_level() == area_id)
}

impl Query {
    pub fn is_empty(&self) -> bool {
        *self == Query::default()
    }

    pub fn matches(&self, entry: &CatalogEntry) -> bool {
        let uc = &entry.use_case;
        if self.risk_level.is_some_and(|level| entry.assessment.level != level) {
            return false;
        }
        if let Some(area) = &self.area_id {
            let hit = entry
                .assessment
                .matched
                .iter()
                .any(|m| &m.area_id == area || top_level_area(&m.area_id) == area);
            if !hit {
                return false;
            }
        }
        if let Some(cap) = &self.capability {
            if !uc.affective_capabilities.iter().any(|c| c == cap) {
                return false;
            }
        }
        if let Some(kind) = self.actor_kind {
            if !uc.actors().any(|a| a.kind == kind) {
                return false;
            }
        }
        if let Some(needle) = &self.free_text {
            let needle = needle.to_lowercase();
            let haystack = format!("{}\n{}", uc.title, uc.intended_purpose).to_lowercase();
            if !haystack.contains(&needle) {
                return false;
            }
        }
        true
    }
}

/// Entries matching every filter, in id order.
pub fn query<'c>(catalog: &'c Catalog, q: &Query) -> Result<Vec<&'c CatalogEntry>> {
    if let Some(area) = &q.area_id {
        if !area_known(&catalog.taxonomy, area) {
            return Err(Error::Query {
                code: "query.unknown_area",
                message: format!("`{area}` is neither a taxonomy entry nor a top-level area"),
            });
        }
    }
    Ok(catalog.entries.iter().filter(|e| q.matches(e)).collect())
}

pub fn stats(catalog: &Catalog) -> Stats {
    let mut by_level: BTreeMap<RiskLevel, usize> = RiskLevel::ALL.iter().map(|l| (*l, 0)).collect();
    let mut by_area = BTreeMap::new();
    let mut by_capability = BTreeMap::new();
    for entry in &catalog.entries {
        *by_level.entry(entry.assessment.level).or_default() += 1;
        let mut areas: Vec<&str> = entry
            .assessment
            .matched
            .iter()
            .map(|m| top_level_area(&m.area_id))
            .collect();
        areas.sort_unstable();
        areas.dedup();
        for area in areas {
            *by_area.entry(area.to_string()).or_default() += 1;
        }
        let mut caps: Vec<&String> = entry.use_case.affective_capabilities.iter().collect();
        caps.sort_unstable();
        caps.dedup();
        for cap in caps {
            *by_capability.entry(cap.clone()).or_default() += 1;
        }
    }
    Stats {
        total: catalog.entries.len(),
        by_level,
        by_area,
        by_capability,
    }
}

impl Stats {
    /// `Level=count` pairs from the highest level down, e.g.
    /// `Unacceptable=0 High=1 Transparency=2 Minimal=0`.
    pub fn level_summary(&self) -> String {
        self.by_level
            .iter()
            .rev()
            .map(|(level, n)| format!("{level}={n}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Serialize, Deserialize)]
struct ExportEntry {
    id: String,
    source_path: String,
    risk_level: RiskLevel,
    use_case: UseCase,
    assessment: RiskAssessment,
}

#[derive(Serialize, Deserialize)]
struct Export {
    schema: String,
    taxonomy_version: String,
    generated_fields: Vec<String>,
    entries: Vec<ExportEntry>,
}

/// Pretty-printed JSON snapshot with a trailing newline. Key order is fixed.
pub fn export_json(catalog: &Catalog) -> Vec<u8> {
    let export = Export {
        schema: SCHEMA.to_string(),
        taxonomy_version: catalog.taxonomy.version.clone(),
        generated_fields: GENERATED_FIELDS.iter().map(|f| f.to_string()).collect(),
        entries: catalog
            .entries
            .iter()
            .map(|e| ExportEntry {
                id: e.use_case.id.clone(),
                source_path: e.source_path.clone(),
                risk_level: e.assessment.level,
                use_case: e.use_case.clone(),
                assessment: e.assessment.clone(),
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&export).expect("catalog serializes");
    bytes.push(b'\n');
    bytes
}

/// Reads a snapshot written by [`export_json`]. The stored assessments are
/// kept as they are; the snapshot must have been built with `taxonomy`.
pub fn from_json(bytes: &[u8], taxonomy: &Taxonomy) -> Result<Catalog> {
    let export: Export = serde_json::from_slice(bytes).map_err(|e| Error::Catalog(e.to_string()))?;
    if export.schema != SCHEMA {
        return Err(Error::Catalog(format!("unsupported schema `{}`", export.schema)));
    }
    if export.taxonomy_version != taxonomy.version {
        return Err(Error::Catalog(format!(
            "catalog was built with taxonomy `{}`, not `{}`",
            export.taxonomy_version, taxonomy.version
        )));
    }
    let mut entries: Vec<CatalogEntry> = export
        .entries
        .into_iter()
        .map(|e| CatalogEntry {
            use_case: e.use_case,
            assessment: e.assessment,
            source_path: e.source_path,
        })
        .collect();
    entries.sort_by(|a, b| a.use_case.id.cmp(&b.use_case.id));
    Ok(Catalog {
        entries,
        taxonomy: taxonomy.clone(),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::fixtures::FIXTURES;
    use crate::risk::builtin_taxonomy;
    use crate::ucdl::serialize_canonical;

    fn sources() -> Vec<(String, String)> {
        FIXTURES.iter().map(|(p, t)| (p.to_string(), t.to_string())).collect()
    }

    fn fixture_catalog() -> Catalog {
        let (cat, diags) = build_catalog(&sources(), builtin_taxonomy());
        assert!(!has_errors(&diags), "{diags:?}");
        cat
    }

    fn ids(entries: &[&CatalogEntry]) -> Vec<String> {
        entries.iter().map(|e| e.use_case.id.clone()).collect()
    }

    #[test]
    fn fixtures_build() {
        let cat = fixture_catalog();
        let levels: Vec<RiskLevel> = cat.entries().iter().map(|e| e.assessment.level).collect();
        assert_eq!(levels, [RiskLevel::High, RiskLevel::Transparency, RiskLevel::Transparency]);
        assert!(cat.get("smart-camera").is_some());
    }

    #[test]
    fn fixture_rebuild_is_idempotent() {
        let cat = fixture_catalog();
        let again: Vec<(String, String)> = cat
            .entries()
            .iter()
            .map(|e| (e.source_path.clone(), serialize_canonical(&e.use_case).unwrap()))
            .collect();
        assert_eq!(build_catalog(&again, builtin_taxonomy()).0, cat);
    }

    #[test]
    fn duplicate_ids() {
        let mut srcs = sources();
        srcs.truncate(1);
        srcs.push(("copy.ucdl".into(), srcs[0].1.clone()));
        let (cat, diags) = build_catalog(&srcs, builtin_taxonomy());
        assert_eq!(cat.len(), 1);
        assert_eq!(cat.entries()[0].source_path, "driver_monitoring.ucdl");
        let dups: Vec<_> = diags.iter().filter(|d| d.code == "catalog.duplicate_id").collect();
        assert_eq!(dups.len(), 1);
        assert!(dups[0].is_error());
    }

    #[test]
    fn bad_file_does_not_abort() {
        let mut srcs = sources();
        srcs.insert(0, ("broken.ucdl".into(), "usecase \"x\" {".into()));
        let (cat, diags) = build_catalog(&srcs, builtin_taxonomy());
        assert_eq!(cat.len(), 3);
        assert!(diags[0].location.as_deref().unwrap().starts_with("broken.ucdl:"));
    }

    #[test]
    fn empty_sources() {
        let (cat, diags) = build_catalog(&[], builtin_taxonomy());
        assert!(cat.is_empty());
        assert!(diags.is_empty());
        let s = stats(&cat);
        assert_eq!(s.total, 0);
        assert!(s.by_level.values().all(|&n| n == 0));
    }

    #[test]
    fn queries() {
        let cat = fixture_catalog();
        let high = Query {
            risk_level: Some(RiskLevel::High),
            ..Query::default()
        };
        assert_eq!(ids(&query(&cat, &high).unwrap()), ["driver-monitoring"]);
        let mood = Query {
            capability: Some("mood_inference".into()),
            ..Query::default()
        };
        assert_eq!(ids(&query(&cat, &mood).unwrap()), ["music-recommender"]);
        assert_eq!(
            ids(&query(&cat, &Query::default()).unwrap()),
            ["driver-monitoring", "music-recommender", "smart-camera"]
        );
        let text = Query {
            free_text: Some("SMILING".into()),
            ..Query::default()
        };
        assert_eq!(ids(&query(&cat, &text).unwrap()), ["smart-camera"]);
        let org = Query {
            actor_kind: Some(ActorKind::Organization),
            ..Query::default()
        };
        assert_eq!(ids(&query(&cat, &org).unwrap()), ["music-recommender"]);
    }

    #[test]
    fn unknown_area_query() {
        let cat = fixture_catalog();
        let q = Query {
            area_id: Some("astrology".into()),
            ..Query::default()
        };
        assert!(matches!(query(&cat, &q), Err(Error::Query { code: "query.unknown_area", .. })));
        let q = Query {
            area_id: Some("employment".into()),
            ..Query::default()
        };
        assert!(query(&cat, &q).unwrap().is_empty());
    }

    #[test]
    fn fixture_stats() {
        let s = stats(&fixture_catalog());
        assert_eq!(s.by_level[&RiskLevel::Transparency], 2);
        assert_eq!(s.by_level[&RiskLevel::High], 1);
        assert_eq!(s.by_level[&RiskLevel::Unacceptable], 0);
        assert_eq!(s.by_level[&RiskLevel::Minimal], 0);
        assert_eq!(s.by_level.values().sum::<usize>(), s.total);
        assert_eq!(s.level_summary(), "Unacceptable=0 High=1 Transparency=2 Minimal=0");
    }

    #[test]
    fn export_shape() {
        let empty = Catalog::empty(builtin_taxonomy());
        let v: serde_json::Value = serde_json::from_slice(&export_json(&empty)).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["entries"], serde_json::json!([]));

        let cat = fixture_catalog();
        let bytes = export_json(&cat);
        assert_eq!(bytes, export_json(&cat));
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let entries = v["entries"].as_array().unwrap();
        assert_eq!(entries.len(), 3);
        assert!(entries.iter().all(|e| e.get("risk_level").is_some()));
        let text = String::from_utf8(bytes.clone()).unwrap();
        let schema = text.find("\"schema\"").unwrap();
        assert!(schema < text.find("\"taxonomy_version\"").unwrap());
        assert!(text.find("\"generated_fields\"").unwrap() < text.find("\"entries\"").unwrap());
        assert_eq!(from_json(&bytes, builtin_taxonomy()).unwrap(), cat);
    }

    fn brute_force<'c>(cat: &'c Catalog, q: &Query) -> Vec<&'c CatalogEntry> {
        let mut out = Vec::new();
        for e in cat.entries() {
            let level_ok = q.risk_level.map_or(true, |l| l == e.assessment.level);
            let area_ok = q.area_id.as_ref().map_or(true, |a| {
                e.assessment
                    .matched
                    .iter()
                    .any(|m| m.area_id == *a || m.area_id.split('.').next() == Some(a.as_str()))
            });
            let cap_ok = q
                .capability
                .as_ref()
                .map_or(true, |c| e.use_case.affective_capabilities.contains(c));
            let kind_ok = q.actor_kind.map_or(true, |k| {
                std::iter::once(&e.use_case.user)
                    .chain(&e.use_case.target_persons)
                    .chain(&e.use_case.secondary_actors)
                    .any(|a| a.kind == k)
            });
            let text_ok = q.free_text.as_ref().map_or(true, |t| {
                let t = t.to_lowercase();
                e.use_case.title.to_lowercase().contains(&t) || e.use_case.intended_purpose.to_lowercase().contains(&t)
            });
            if level_ok && area_ok && cap_ok && kind_ok && text_ok {
                out.push(e);
            }
        }
        out
    }

    fn catalog_of(use_cases: Vec<UseCase>) -> Catalog {
        let srcs: Vec<(String, String)> = use_cases
            .iter()
            .enumerate()
            .map(|(i, uc)| (format!("uc{i}.ucdl"), serialize_canonical(uc).unwrap()))
            .collect();
        build_catalog(&srcs, builtin_taxonomy()).0
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn query_sound_and_complete(
            ucs in proptest::collection::vec(crate::testkit::use_case(), 0..6),
            level in proptest::option::of(proptest::sample::select(RiskLevel::ALL.to_vec())),
            area in proptest::option::of(proptest::sample::select(vec!["employment", "education.assess_students", "social_scoring"])),
            kind in proptest::option::of(proptest::sample::select(vec![ActorKind::Human, ActorKind::System])),
            text in proptest::option::of("[a-e]{1,2}"),
        ) {
            let cat = catalog_of(ucs);
            let q = Query { risk_level: level, area_id: area.map(String::from), capability: None, actor_kind: kind, free_text: text };
            let got = query(&cat, &q).unwrap();
            prop_assert_eq!(ids(&got), ids(&brute_force(&cat, &q)));
            let s = stats(&cat);
            prop_assert_eq!(s.by_level.values().sum::<usize>(), s.total);
            prop_assert_eq!(s.total, cat.len());
        }

        #[test]
        fn rebuild_is_idempotent(ucs in proptest::collection::vec(crate::testkit::use_case(), 0..5)) {
            let cat = catalog_of(ucs);
            let again: Vec<(String, String)> = cat
                .entries()
                .iter()
                .map(|e| (e.source_path.clone(), serialize_canonical(&e.use_case).unwrap()))
                .collect();
            let (rebuilt, _) = build_catalog(&again, builtin_taxonomy());
            prop_assert_eq!(&rebuilt, &cat);
            let bytes = export_json(&cat);
            prop_assert_eq!(from_json(&bytes, builtin_taxonomy()).unwrap(), cat);
        }
    }
}

//! Browser bindings: classify, draw and tabulate a `.ucdl` document.
//!
//! Each export takes the document text and works on its first use case.

use wasm_bindgen::prelude::*;

use ucdoc_core::diagram::{build_diagram, layout, render_svg, LayoutConfig};
use ucdoc_core::docgen::render_html_page;
use ucdoc_core::fixtures::FIXTURES;
use ucdoc_core::model::{validate_use_case, Diagnostic, UseCase};
use ucdoc_core::{builtin_taxonomy, classify, explain, parse_document};

fn first_use_case(source: &str) -> Result<UseCase, String> {
    let (mut use_cases, errors) = parse_document(source);
    if !errors.is_empty() {
        return Err(errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"));
    }
    if use_cases.is_empty() {
        return Err("no use case found".into());
    }
    let uc = use_cases.remove(0);
    let problems: Vec<Diagnostic> = validate_use_case(&uc).into_iter().filter(Diagnostic::is_error).collect();
    if !problems.is_empty() {
        return Err(problems.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"));
    }
    Ok(uc)
}

/// Rule trace of the first use case.
pub fn classify_source(source: &str) -> Result<String, String> {
    let uc = first_use_case(source)?;
    let assessment = classify(&uc, builtin_taxonomy()).map_err(|e| e.to_string())?;
    Ok(explain(&assessment))
}

pub fn diagram_source(source: &str) -> Result<String, String> {
    let uc = first_use_case(source)?;
    let (diagram, _) = build_diagram(&uc).map_err(|e| e.to_string())?;
    String::from_utf8(render_svg(&layout(&diagram, &LayoutConfig::default()))).map_err(|e| e.to_string())
}

/// Standalone HTML page with the documentation table, risk rows and diagram.
pub fn table_source(source: &str) -> Result<String, String> {
    let uc = first_use_case(source)?;
    let assessment = classify(&uc, builtin_taxonomy()).map_err(|e| e.to_string())?;
    let (diagram, _) = build_diagram(&uc).map_err(|e| e.to_string())?;
    let svg = render_svg(&layout(&diagram, &LayoutConfig::default()));
    render_html_page(&uc, Some(&assessment), Some(&svg)).map_err(|e| e.to_string())
}

/// `[["name", "source"], ...]` for the bundled examples.
pub fn fixtures_json() -> String {
    let pairs: Vec<[&str; 2]> = FIXTURES.iter().map(|(name, text)| [*name, *text]).collect();
    serde_json::to_string(&pairs).unwrap_or_else(|_| "[]".into())
}

#[wasm_bindgen]
pub fn classify_ucdl(source: &str) -> Result<String, JsError> {
    classify_source(source).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn diagram_ucdl(source: &str) -> Result<String, JsError> {
    diagram_source(source).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn table_ucdl(source: &str) -> Result<String, JsError> {
    table_source(source).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixtures() -> String {
    fixtures_json()
}

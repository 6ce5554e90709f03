//! Documentation tables in the adapted Cockburn layout.
//!
//! Authored fields come first in a fixed order. A risk assessment, when
//! given, is rendered as a separate table of derived rows so generated
//! classification never mixes with what the author wrote.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{require_structurally_valid, Actor, ApplicationAreaRef, ScenarioStep, UseCase, SYSTEM_ACTOR};
use crate::risk::{builtin_taxonomy, explain, RiskAssessment};

/// Placeholder for empty fields.
pub const EMPTY: &str = "—";

/// Row labels, in output order.
pub const ROW_LABELS: [&str; 16] = [
    "Use case",
    "Intended purpose",
    "Application areas",
    "Level",
    "User",
    "Target persons",
    "Context of use",
    "Inputs",
    "Outputs",
    "Preconditions",
    "Trigger",
    "Success guarantee",
    "Minimal guarantee",
    "Main success scenario",
    "Extensions",
    "Misuses",
];

pub const RISK_LABELS: [&str; 2] = ["Risk level", "Risk rationale"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub label: &'static str,
    /// Plain text; lines separated by `\n`.
    pub value: String,
}

fn or_empty(text: String) -> String {
    if text.trim().is_empty() {
        EMPTY.to_string()
    } else {
        text
    }
}

fn actor_text(actor: &Actor) -> String {
    format!("{} ({})", actor.name, actor.kind.as_str())
}

fn area_text(area: &ApplicationAreaRef) -> String {
    if area.is_other() {
        return area.to_string();
    }
    match builtin_taxonomy().get(&area.area_id) {
        Some(entry) => format!("{} ({})", entry.label(), entry.area_id),
        None => area.area_id.clone(),
    }
}

fn step_text(uc: &UseCase, step: &ScenarioStep) -> String {
    let actor = if step.actor == SYSTEM_ACTOR {
        "System"
    } else {
        uc.resolve_actor(&step.actor).map_or(step.actor.as_str(), |a| a.name.as_str())
    };
    format!("{}. {}: {}", step.index, actor, step.action)
}

/// The authored rows, one per label in [`ROW_LABELS`].
pub fn table_rows(uc: &UseCase) -> Result<Vec<TableRow>> {
    require_structurally_valid(uc)?;
    let lines = |items: Vec<String>| or_empty(items.join("\n"));

    let mut purpose = uc.intended_purpose.trim().to_string();
    if uc.safety_component {
        purpose.push_str("\nSafety component of a product.");
    }
    let extensions = uc
        .extensions
        .iter()
        .flat_map(|ext| {
            std::iter::once(format!("{}. {}", ext.branch_id, ext.condition))
                .chain(ext.steps.iter().map(|s| format!("    {}", step_text(uc, s))))
        })
        .collect();
    let misuses = uc
        .misuses
        .iter()
        .map(|m| match &m.area_ref {
            Some(area) => format!("{} [area: {}]", m.description, area_text(area)),
            None => m.description.clone(),
        })
        .collect();

    let values = [
        uc.title.clone(),
        purpose,
        lines(uc.application_areas.iter().map(area_text).collect()),
        uc.level.label().to_string(),
        actor_text(&uc.user),
        lines(uc.target_persons.iter().map(actor_text).collect()),
        uc.context_of_use.clone(),
        lines(uc.inputs.clone()),
        lines(uc.outputs.clone()),
        lines(uc.preconditions.clone()),
        uc.trigger.clone(),
        uc.success_guarantee.clone(),
        uc.minimal_guarantee.clone(),
        lines(uc.main_scenario.iter().map(|s| step_text(uc, s)).collect()),
        lines(extensions),
        lines(misuses),
    ];
    Ok(ROW_LABELS
        .iter()
        .zip(values)
        .map(|(label, value)| TableRow {
            label,
            value: or_empty(value),
        })
        .collect())
}

/// Derived rows: the level and the explanation without its headline.
pub fn risk_rows(assessment: &RiskAssessment) -> Vec<TableRow> {
    let text = explain(assessment);
    let rationale: Vec<&str> = text.lines().skip(1).collect();
    vec![
        TableRow {
            label: RISK_LABELS[0],
            value: assessment.level.to_string(),
        },
        TableRow {
            label: RISK_LABELS[1],
            value: or_empty(rationale.join("\n")),
        },
    ]
}

/// Escapes a value for a single Markdown table cell.
pub fn escape_cell(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '|' => out.push_str("\\|"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("<br>"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape_cell`].
pub fn unescape_cell(cell: &str) -> String {
    const ENTITIES: [(&str, char); 5] = [("<br>", '\n'), ("&amp;", '&'), ("&lt;", '<'), ("&gt;", '>'), ("&#13;", '\r')];
    let mut out = String::with_capacity(cell.len());
    let mut rest = cell;
    'outer: while let Some(c) = rest.chars().next() {
        if c == '\\' {
            if let Some(next) = rest[1..].chars().next() {
                out.push(next);
                rest = &rest[1 + next.len_utf8()..];
                continue;
            }
        }
        for (entity, ch) in ENTITIES {
            if let Some(tail) = rest.strip_prefix(entity) {
                out.push(ch);
                rest = tail;
                continue 'outer;
            }
        }
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    out
}

fn markdown_table(out: &mut String, header: &str, rows: &[TableRow]) {
    let _ = writeln!(out, "| {header} | Value |");
    out.push_str("|---|---|\n");
    for row in rows {
        let _ = writeln!(out, "| {} | {} |", row.label, escape_cell(&row.value));
    }
}

/// Two-column Markdown table. With an assessment, a second table of derived
/// rows follows after a blank line.
pub fn render_table_markdown(uc: &UseCase, assessment: Option<&RiskAssessment>) -> Result<String> {
    let rows = table_rows(uc)?;
    let mut out = String::new();
    markdown_table(&mut out, "Field", &rows);
    if let Some(assessment) = assessment {
        out.push('\n');
        markdown_table(&mut out, "Derived", &risk_rows(assessment));
    }
    Ok(out)
}

/// Splits a table row at unescaped pipes.
fn split_cells(line: &str) -> Vec<&str> {
    let inner = line.trim().trim_start_matches('|');
    let inner = inner.strip_suffix('|').unwrap_or(inner);
    let mut cells = Vec::new();
    let mut start = 0;
    let mut escaped = false;
    for (i, c) in inner.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' => escaped = true,
            '|' => {
                cells.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    cells.push(inner[start..].trim());
    cells
}

/// Reads `(label, value)` pairs back from [`render_table_markdown`] output,
/// skipping header and separator rows.
pub fn parse_table_markdown(text: &str) -> Vec<(String, String)> {
    let mut rows = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next() {
        if !line.starts_with('|') {
            continue;
        }
        if lines.peek().is_some_and(|next| next.starts_with("|---")) {
            lines.next();
            continue;
        }
        let cells = split_cells(line);
        if let [label, value] = cells[..] {
            rows.push((unescape_cell(label), unescape_cell(value)));
        }
    }
    rows
}

fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            '\n' => out.push_str("<br>\n"),
            _ => out.push(c),
        }
    }
    out
}

fn html_table(out: &mut String, class: &str, rows: &[TableRow]) {
    let _ = writeln!(out, "<table class=\"{class}\">");
    for row in rows {
        let _ = writeln!(out, "<tr><th>{}</th><td>{}</td></tr>", row.label, escape_html(&row.value));
    }
    out.push_str("</table>\n");
}

/// Extracts the root `<svg>` element, rejecting anything that is not a
/// well-formed SVG document.
fn svg_element(svg: &[u8]) -> Result<&str> {
    let text = std::str::from_utf8(svg).map_err(|e| Error::MalformedSvg(e.to_string()))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::MalformedSvg(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(Error::MalformedSvg(format!("root element is <{}>", root.tag_name().name())));
    }
    if root.descendants().skip(1).any(|n| n.has_tag_name("svg")) {
        return Err(Error::MalformedSvg("nested <svg> elements".into()));
    }
    Ok(&text[root.range()])
}

/// Standalone HTML5 page: title, the inline diagram (if any), the table and
/// the derived rows (if any).
pub fn render_html_page(uc: &UseCase, assessment: Option<&RiskAssessment>, svg: Option<&[u8]>) -> Result<String> {
    let rows = table_rows(uc)?;
    let svg = svg.map(svg_element).transpose()?;
    let title = escape_html(uc.title.trim());
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{title}</title>");
    out.push_str(
        "<style>\nbody { font-family: sans-serif; margin: 2em; }\ntable { border-collapse: collapse; margin-bottom: 1.5em; }\nth, td { border: 1px solid #999; padding: 0.3em 0.6em; text-align: left; vertical-align: top; }\nth { background: #eee; white-space: nowrap; }\ntable.derived th { background: #fde9c8; }\n</style>\n",
    );
    out.push_str("</head>\n<body>\n");
    let _ = writeln!(out, "<h1>{title}</h1>");
    if let Some(svg) = svg {
        out.push_str("<figure class=\"diagram\">\n");
        out.push_str(svg);
        out.push_str("\n</figure>\n");
    }
    html_table(&mut out, "usecase", &rows);
    if let Some(assessment) = assessment {
        html_table(&mut out, "derived", &risk_rows(assessment));
    }
    out.push_str("</body>\n</html>\n");
    Ok(out)
}

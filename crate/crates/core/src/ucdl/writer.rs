use std::fmt::Write as _;

use super::lexer::{dedent_block, is_word};
use crate::error::{Error, Result};
use crate::model::{canonicalize_with, has_errors, validate_with, Actor, ApplicationAreaRef, ScenarioStep, UseCase};
use crate::risk::{builtin_taxonomy, Taxonomy};

/// Emits the canonical UCDL form of a use case (built-in taxonomy).
pub fn serialize_canonical(uc: &UseCase) -> Result<String> {
    serialize_canonical_with(uc, builtin_taxonomy())
}

pub fn serialize_canonical_with(uc: &UseCase, taxonomy: &Taxonomy) -> Result<String> {
    let diagnostics = validate_with(uc, taxonomy);
    if has_errors(&diagnostics) {
        return Err(Error::ValidationFailed(diagnostics));
    }
    let uc = canonicalize_with(uc, taxonomy)?;
    let mut w = Writer::default();
    w.line(format!("usecase {} {{", quote(&uc.title)));
    w.indent += 1;
    w.line(format!("id: {}", reference(&uc.id)));
    w.prose("intended_purpose", &uc.intended_purpose);
    w.line(format!("safety_component: {}", uc.safety_component));
    w.line(format!(
        "affective_capabilities: [{}]",
        uc.affective_capabilities.join(", ")
    ));
    w.actor("user", &uc.user);
    w.actor_group("target_persons", "person", &uc.target_persons);
    w.actor_group("secondary_actors", "actor", &uc.secondary_actors);
    w.prose("context_of_use", &uc.context_of_use);
    w.line(format!(
        "application_areas: [{}]",
        uc.application_areas.iter().map(area).collect::<Vec<_>>().join(", ")
    ));
    for misuse in &uc.misuses {
        w.open("misuse");
        w.line(format!("description: {}", quote(&misuse.description)));
        if let Some(a) = &misuse.area_ref {
            w.line(format!("area: {}", area(a)));
        }
        w.close();
    }
    w.string_list("inputs", &uc.inputs);
    w.string_list("outputs", &uc.outputs);
    w.line(format!("level: {}", uc.level.as_str()));
    w.string_list("preconditions", &uc.preconditions);
    w.line(format!("trigger: {}", quote(&uc.trigger)));
    w.line(format!("success_guarantee: {}", quote(&uc.success_guarantee)));
    w.line(format!("minimal_guarantee: {}", quote(&uc.minimal_guarantee)));
    w.open("functions");
    for func in &uc.system_functions {
        let head = format!("{}: {}", func.id, quote(&func.label));
        if func.includes.is_empty() && func.extends.is_empty() {
            w.line(head);
            continue;
        }
        w.open(&head);
        if !func.includes.is_empty() {
            w.line(format!("includes: [{}]", func.includes.join(", ")));
        }
        if !func.extends.is_empty() {
            w.line(format!("extends: [{}]", func.extends.join(", ")));
        }
        w.close();
    }
    w.close();
    w.open("scenario");
    w.steps(&uc.main_scenario);
    w.close();
    for ext in &uc.extensions {
        w.open(&format!("extension {} {}", ext.branch_id, quote(&ext.condition)));
        w.steps(&ext.steps);
        w.close();
    }
    if !uc.associations.is_empty() {
        w.open("associations");
        for assoc in &uc.associations {
            w.line(format!("{} -> {}", reference(&assoc.actor), assoc.function));
        }
        w.close();
    }
    w.indent -= 1;
    w.line("}");
    Ok(w.out)
}

#[derive(Default)]
struct Writer {
    out: String,
    indent: usize,
}

impl Writer {
    fn line(&mut self, text: impl AsRef<str>) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(text.as_ref());
        self.out.push('\n');
    }

    fn open(&mut self, head: &str) {
        self.line(format!("{head} {{"));
        self.indent += 1;
    }

    fn close(&mut self) {
        self.indent -= 1;
        self.line("}");
    }

    fn actor(&mut self, key: &str, actor: &Actor) {
        self.open(key);
        self.line(format!("name: {}", quote(&actor.name)));
        self.line(format!("kind: {}", actor.kind.as_str()));
        self.close();
    }

    fn actor_group(&mut self, key: &str, item: &str, actors: &[Actor]) {
        if actors.is_empty() {
            return;
        }
        self.open(key);
        for actor in actors {
            self.actor(item, actor);
        }
        self.close();
    }

    fn string_list(&mut self, key: &str, items: &[String]) {
        let items: Vec<String> = items.iter().map(|s| quote(s)).collect();
        self.line(format!("{key}: [{}]", items.join(", ")));
    }

    fn steps(&mut self, steps: &[ScenarioStep]) {
        for step in steps {
            let mut text = format!("{} {}: {}", step.index, reference(&step.actor), quote(&step.action));
            if let Some(func) = &step.function {
                let _ = write!(text, " -> {func}");
            }
            self.line(text);
        }
    }

    /// Multi-line prose goes into a `"""` block when that reads back
    /// unchanged; everything else is an escaped string.
    fn prose(&mut self, key: &str, text: &str) {
        if let Some(block) = self.triple_quoted(text) {
            self.line(format!("{key}: \"\"\""));
            self.out.push_str(&block);
            self.line("\"\"\"");
        } else {
            self.line(format!("{key}: {}", quote(text)));
        }
    }

    fn triple_quoted(&self, text: &str) -> Option<String> {
        if !text.contains('\n') || text.contains("\"\"\"") || text.ends_with('"') || text.contains('\t') || text.contains('\r') {
            return None;
        }
        let pad = "  ".repeat(self.indent + 1);
        let mut block = String::new();
        for line in text.split('\n') {
            if !line.is_empty() {
                block.push_str(&pad);
            }
            block.push_str(line);
            block.push('\n');
        }
        let closing = "  ".repeat(self.indent);
        let raw = format!("\n{block}{closing}");
        (dedent_block(&raw) == text).then_some(block)
    }
}

fn reference(text: &str) -> String {
    if is_word(text) {
        text.to_string()
    } else {
        quote(text)
    }
}

fn area(area: &ApplicationAreaRef) -> String {
    match (&area.free_label, area.is_other()) {
        (Some(label), true) => format!("other({})", quote(label)),
        _ => area.area_id.clone(),
    }
}

pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

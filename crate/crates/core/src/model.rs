//! Domain types for documented use cases and the semantic validator.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::{builtin_taxonomy, Taxonomy};

/// Reserved step actor naming the system under description.
pub const SYSTEM_ACTOR: &str = "system";

/// Reserved area identifier for areas outside the taxonomy.
pub const OTHER_AREA: &str = "other";

/// The four-tier risk ladder. Declaration order is ascending, so the derived
/// `Ord` ranks `Unacceptable` highest and `Minimal` lowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskLevel {
    Minimal,
    Transparency,
    High,
    Unacceptable,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 4] = [
        RiskLevel::Unacceptable,
        RiskLevel::High,
        RiskLevel::Transparency,
        RiskLevel::Minimal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskLevel::Unacceptable => "Unacceptable",
            RiskLevel::High => "High",
            RiskLevel::Transparency => "Transparency",
            RiskLevel::Minimal => "Minimal",
        }
    }

    /// Case-insensitive parse of the level name.
    pub fn parse(text: &str) -> Option<RiskLevel> {
        RiskLevel::ALL
            .into_iter()
            .find(|level| level.as_str().eq_ignore_ascii_case(text.trim()))
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn risk_order(a: RiskLevel, b: RiskLevel) -> Ordering {
    a.cmp(&b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorKind {
    Human,
    Organization,
    System,
}

impl ActorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActorKind::Human => "human",
            ActorKind::Organization => "organization",
            ActorKind::System => "system",
        }
    }

    pub fn parse(text: &str) -> Option<ActorKind> {
        match text {
            "human" => Some(ActorKind::Human),
            "organization" => Some(ActorKind::Organization),
            "system" => Some(ActorKind::System),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorRole {
    User,
    TargetPerson,
    Secondary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub name: String,
    pub kind: ActorKind,
    pub role: ActorRole,
}

impl Actor {
    pub fn new(name: impl Into<String>, kind: ActorKind, role: ActorRole) -> Self {
        Actor {
            name: name.into(),
            kind,
            role,
        }
    }

    /// Identifier form of the name used by scenario steps: lowercase, runs of
    /// non-alphanumeric characters collapsed to `_`.
    pub fn handle(&self) -> String {
        actor_handle(&self.name)
    }
}

pub fn actor_handle(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_sep = false;
    for c in name.trim().chars() {
        if c.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.extend(c.to_lowercase());
        } else {
            pending_sep = true;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalLevel {
    Summary,
    UserGoal,
    Subfunction,
}

impl GoalLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            GoalLevel::Summary => "summary",
            GoalLevel::UserGoal => "user_goal",
            GoalLevel::Subfunction => "subfunction",
        }
    }

    pub fn parse(text: &str) -> Option<GoalLevel> {
        match text {
            "summary" => Some(GoalLevel::Summary),
            "user_goal" => Some(GoalLevel::UserGoal),
            "subfunction" => Some(GoalLevel::Subfunction),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GoalLevel::Summary => "Summary",
            GoalLevel::UserGoal => "User goal",
            GoalLevel::Subfunction => "Subfunction",
        }
    }
}

impl Default for GoalLevel {
    fn default() -> Self {
        GoalLevel::UserGoal
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioStep {
    pub index: u32,
    /// Actor handle, or [`SYSTEM_ACTOR`].
    pub actor: String,
    pub action: String,
    /// Optional `-> function_id` annotation tying the step to a system function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
}

impl ScenarioStep {
    pub fn new(index: u32, actor: impl Into<String>, action: impl Into<String>) -> Self {
        ScenarioStep {
            index,
            actor: actor.into(),
            action: action.into(),
            function: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extension {
    pub branch_id: String,
    pub condition: String,
    pub steps: Vec<ScenarioStep>,
}

impl Extension {
    /// Splits `"3a"` into `(3, "a")`. `None` when the id is not
    /// `<step-index><letter>`.
    pub fn parse_branch_id(branch_id: &str) -> Option<(u32, char)> {
        let digits: String = branch_id.chars().take_while(|c| c.is_ascii_digit()).collect();
        let rest = &branch_id[digits.len()..];
        let mut letters = rest.chars();
        let letter = letters.next()?;
        if digits.is_empty() || letters.next().is_some() || !letter.is_ascii_lowercase() {
            return None;
        }
        Some((digits.parse().ok()?, letter))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ApplicationAreaRef {
    pub area_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_label: Option<String>,
}

impl ApplicationAreaRef {
    pub fn taxonomy(area_id: impl Into<String>) -> Self {
        ApplicationAreaRef {
            area_id: area_id.into(),
            free_label: None,
        }
    }

    pub fn other(label: impl Into<String>) -> Self {
        ApplicationAreaRef {
            area_id: OTHER_AREA.to_string(),
            free_label: Some(label.into()),
        }
    }

    pub fn is_other(&self) -> bool {
        self.area_id == OTHER_AREA
    }
}

impl fmt::Display for ApplicationAreaRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.free_label, self.is_other()) {
            (Some(label), true) => write!(f, "{label} (other)"),
            _ => f.write_str(&self.area_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Misuse {
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_ref: Option<ApplicationAreaRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemFunction {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub includes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extends: Vec<String>,
}

impl SystemFunction {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        SystemFunction {
            id: id.into(),
            label: label.into(),
            includes: Vec::new(),
            extends: Vec::new(),
        }
    }
}

/// Explicit actor-to-function link overriding association inference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Association {
    pub actor: String,
    pub function: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseCase {
    pub id: String,
    pub title: String,
    pub intended_purpose: String,
    pub safety_component: bool,
    pub affective_capabilities: Vec<String>,
    pub user: Actor,
    pub target_persons: Vec<Actor>,
    #[serde(default)]
    pub secondary_actors: Vec<Actor>,
    pub context_of_use: String,
    pub application_areas: Vec<ApplicationAreaRef>,
    pub misuses: Vec<Misuse>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub level: GoalLevel,
    pub preconditions: Vec<String>,
    pub trigger: String,
    pub success_guarantee: String,
    pub minimal_guarantee: String,
    pub system_functions: Vec<SystemFunction>,
    pub main_scenario: Vec<ScenarioStep>,
    pub extensions: Vec<Extension>,
    #[serde(default)]
    pub associations: Vec<Association>,
}

impl UseCase {
    /// A use case with only the mandatory identity fields set; everything else
    /// empty. Not valid until areas, inputs, outputs, functions and a scenario
    /// are filled in.
    pub fn skeleton(id: impl Into<String>, title: impl Into<String>, user: Actor) -> Self {
        UseCase {
            id: id.into(),
            title: title.into(),
            intended_purpose: String::new(),
            safety_component: false,
            affective_capabilities: Vec::new(),
            user,
            target_persons: Vec::new(),
            secondary_actors: Vec::new(),
            context_of_use: String::new(),
            application_areas: Vec::new(),
            misuses: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            level: GoalLevel::default(),
            preconditions: Vec::new(),
            trigger: String::new(),
            success_guarantee: String::new(),
            minimal_guarantee: String::new(),
            system_functions: Vec::new(),
            main_scenario: Vec::new(),
            extensions: Vec::new(),
            associations: Vec::new(),
        }
    }

    /// User first, then target persons, then secondary actors.
    pub fn actors(&self) -> impl Iterator<Item = &Actor> {
        std::iter::once(&self.user)
            .chain(&self.target_persons)
            .chain(&self.secondary_actors)
    }

    /// Resolves a step actor reference by exact name or by handle.
    pub fn resolve_actor(&self, reference: &str) -> Option<&Actor> {
        let reference = reference.trim();
        self.actors()
            .find(|a| a.name.trim() == reference || a.handle() == reference)
    }

    pub fn function(&self, id: &str) -> Option<&SystemFunction> {
        self.system_functions.iter().find(|f| f.id == id)
    }

    /// Main-scenario steps followed by every extension's steps.
    pub fn all_steps(&self) -> impl Iterator<Item = &ScenarioStep> {
        self.main_scenario
            .iter()
            .chain(self.extensions.iter().flat_map(|e| e.steps.iter()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl Diagnostic {
    pub fn error(code: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            location: Some(location.into()),
        }
    }

    pub fn warning(code: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.to_string(),
            message: message.into(),
            location: Some(location.into()),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn with_location_prefix(mut self, prefix: &str) -> Self {
        self.location = Some(match self.location {
            Some(loc) => format!("{prefix}:{loc}"),
            None => prefix.to_string(),
        });
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(location) = &self.location {
            write!(f, "{location}: ")?;
        }
        write!(f, "{}[{}]: {}", self.severity, self.code, self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// `[a-z0-9_-]+`
pub fn is_slug(text: &str) -> bool {
    !text.is_empty()
        && text
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

fn is_tag(text: &str) -> bool {
    !text.is_empty()
        && text
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn blank(text: &str) -> bool {
    text.trim().is_empty()
}

/// Validates against the built-in taxonomy.
pub fn validate_use_case(uc: &UseCase) -> Vec<Diagnostic> {
    validate_with(uc, builtin_taxonomy())
}

/// Reports every invariant violation, sorted by location then code.
pub fn validate_with(uc: &UseCase, taxonomy: &Taxonomy) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if !is_slug(uc.id.trim()) {
        out.push(Diagnostic::error(
            "id.invalid",
            "id",
            format!("use case id `{}` must match [a-z0-9_-]+", uc.id),
        ));
    }
    if blank(&uc.title) {
        out.push(Diagnostic::error("title.empty", "title", "title must not be empty"));
    }
    if blank(&uc.intended_purpose) {
        out.push(Diagnostic::error(
            "intended_purpose.empty",
            "intended_purpose",
            "intended purpose must not be empty",
        ));
    }
    for (i, tag) in uc.affective_capabilities.iter().enumerate() {
        if !is_tag(tag.trim()) {
            out.push(Diagnostic::error(
                "capability.invalid",
                format!("affective_capabilities[{i}]"),
                format!("capability tag `{tag}` must match [a-z0-9_]+"),
            ));
        }
    }

    validate_actors(uc, &mut out);

    if uc.application_areas.is_empty() {
        out.push(Diagnostic::error(
            "areas.empty",
            "application_areas",
            "at least one application area is required",
        ));
    }
    for (i, area) in uc.application_areas.iter().enumerate() {
        validate_area_ref(area, &format!("application_areas[{i}]"), taxonomy, &mut out);
    }
    for (i, misuse) in uc.misuses.iter().enumerate() {
        if blank(&misuse.description) {
            out.push(Diagnostic::error(
                "misuse.description_empty",
                format!("misuses[{i}].description"),
                "misuse description must not be empty",
            ));
        }
        if let Some(area) = &misuse.area_ref {
            validate_area_ref(area, &format!("misuses[{i}].area_ref"), taxonomy, &mut out);
        }
    }

    for (field, items) in [
        ("inputs", &uc.inputs),
        ("outputs", &uc.outputs),
        ("preconditions", &uc.preconditions),
    ] {
        if items.is_empty() && field != "preconditions" {
            out.push(Diagnostic::error(
                &format!("{field}.empty"),
                field,
                format!("at least one entry is required in {field}"),
            ));
        }
        for (i, item) in items.iter().enumerate() {
            if blank(item) {
                out.push(Diagnostic::error(
                    "item.empty",
                    format!("{field}[{i}]"),
                    "list entries must not be empty",
                ));
            }
        }
    }

    validate_functions(uc, &mut out);
    validate_scenario(uc, &mut out);

    for (i, assoc) in uc.associations.iter().enumerate() {
        let loc = format!("associations[{i}]");
        if uc.resolve_actor(&assoc.actor).is_none() {
            out.push(Diagnostic::error(
                "association.unknown_actor",
                loc.clone(),
                format!("association actor `{}` is not declared", assoc.actor),
            ));
        }
        if uc.function(&assoc.function).is_none() {
            out.push(Diagnostic::error(
                "association.unknown_function",
                loc,
                format!("association function `{}` is not declared", assoc.function),
            ));
        }
    }

    sort_diagnostics(&mut out);
    out
}

/// Validation for consumers that do not depend on the taxonomy (diagrams,
/// tables): every error except unknown area ids is fatal.
pub(crate) fn require_structurally_valid(uc: &UseCase) -> Result<()> {
    let diagnostics: Vec<Diagnostic> = validate_use_case(uc)
        .into_iter()
        .filter(|d| d.code != "area.unknown")
        .collect();
    if has_errors(&diagnostics) {
        Err(Error::ValidationFailed(diagnostics))
    } else {
        Ok(())
    }
}

pub fn sort_diagnostics(diagnostics: &mut [Diagnostic]) {
    diagnostics.sort_by(|a, b| {
        a.location
            .cmp(&b.location)
            .then_with(|| a.code.cmp(&b.code))
            .then_with(|| a.message.cmp(&b.message))
    });
}

fn validate_actors(uc: &UseCase, out: &mut Vec<Diagnostic>) {
    let groups: [(&str, &[Actor], ActorRole); 3] = [
        ("user", std::slice::from_ref(&uc.user), ActorRole::User),
        ("target_persons", &uc.target_persons, ActorRole::TargetPerson),
        ("secondary_actors", &uc.secondary_actors, ActorRole::Secondary),
    ];
    let mut seen = HashSet::new();
    for (field, actors, role) in groups {
        for (i, actor) in actors.iter().enumerate() {
            let loc = if field == "user" {
                "user".to_string()
            } else {
                format!("{field}[{i}]")
            };
            if actor.role != role {
                out.push(Diagnostic::error(
                    "actor.role_mismatch",
                    format!("{loc}.role"),
                    format!("actor `{}` declared under {field} has another role", actor.name),
                ));
            }
            let handle = actor.handle();
            if handle.is_empty() {
                out.push(Diagnostic::error(
                    "actor.name_empty",
                    format!("{loc}.name"),
                    "actor name must contain a letter or digit",
                ));
                continue;
            }
            if handle == SYSTEM_ACTOR {
                out.push(Diagnostic::error(
                    "actor.reserved",
                    format!("{loc}.name"),
                    "`system` is reserved for the system under description",
                ));
            } else if !seen.insert(handle) {
                out.push(Diagnostic::error(
                    "actor.duplicate",
                    format!("{loc}.name"),
                    format!("actor `{}` is declared more than once", actor.name),
                ));
            }
        }
    }
}

fn validate_area_ref(
    area: &ApplicationAreaRef,
    loc: &str,
    taxonomy: &Taxonomy,
    out: &mut Vec<Diagnostic>,
) {
    let label_blank = area.free_label.as_deref().map_or(true, blank);
    if area.is_other() {
        if label_blank {
            out.push(Diagnostic::error(
                "area.label_missing",
                format!("{loc}.free_label"),
                "`other` areas need a label",
            ));
        }
    } else {
        if taxonomy.get(&area.area_id).is_none() {
            out.push(Diagnostic::error(
                "area.unknown",
                format!("{loc}.area_id"),
                format!("`{}` is not a taxonomy area; use other(\"...\")", area.area_id),
            ));
        }
        if area.free_label.is_some() {
            out.push(Diagnostic::error(
                "area.label_unexpected",
                format!("{loc}.free_label"),
                "only `other` areas carry a free label",
            ));
        }
    }
}

fn validate_functions(uc: &UseCase, out: &mut Vec<Diagnostic>) {
    if uc.system_functions.is_empty() {
        out.push(Diagnostic::error(
            "functions.empty",
            "system_functions",
            "at least one system function is required",
        ));
    }
    let mut seen = HashSet::new();
    for (i, func) in uc.system_functions.iter().enumerate() {
        let loc = format!("system_functions[{i}]");
        if !is_slug(&func.id) {
            out.push(Diagnostic::error(
                "function.id_invalid",
                format!("{loc}.id"),
                format!("function id `{}` must match [a-z0-9_-]+", func.id),
            ));
        } else if !seen.insert(func.id.as_str()) {
            out.push(Diagnostic::error(
                "function.duplicate",
                format!("{loc}.id"),
                format!("function `{}` is declared more than once", func.id),
            ));
        }
        if blank(&func.label) {
            out.push(Diagnostic::error(
                "function.label_empty",
                format!("{loc}.label"),
                "function label must not be empty",
            ));
        }
        for (kind, targets) in [("includes", &func.includes), ("extends", &func.extends)] {
            for (j, target) in targets.iter().enumerate() {
                let tloc = format!("{loc}.{kind}[{j}]");
                if target == &func.id {
                    out.push(Diagnostic::error(
                        "function.self_ref",
                        tloc,
                        format!("function `{target}` cannot {} itself", &kind[..kind.len() - 1]),
                    ));
                } else if uc.function(target).is_none() {
                    out.push(Diagnostic::error(
                        "function.unknown_ref",
                        tloc,
                        format!("`{target}` is not a declared function"),
                    ));
                }
            }
        }
    }
}

fn validate_steps(uc: &UseCase, steps: &[ScenarioStep], loc: &str, code: &str, out: &mut Vec<Diagnostic>) {
    let contiguous = steps
        .iter()
        .enumerate()
        .all(|(i, step)| step.index as usize == i + 1);
    if !contiguous {
        let indices: Vec<String> = steps.iter().map(|s| s.index.to_string()).collect();
        out.push(Diagnostic::error(
            code,
            loc,
            format!("step indices must run 1..{} without gaps, found [{}]", steps.len(), indices.join(", ")),
        ));
    }
    for (i, step) in steps.iter().enumerate() {
        let sloc = format!("{loc}[{i}]");
        if blank(&step.action) {
            out.push(Diagnostic::error(
                "step.action_empty",
                format!("{sloc}.action"),
                "step action must not be empty",
            ));
        }
        if step.actor != SYSTEM_ACTOR && uc.resolve_actor(&step.actor).is_none() {
            out.push(Diagnostic::error(
                "step.unknown_actor",
                format!("{sloc}.actor"),
                format!("step actor `{}` is not a declared actor or `system`", step.actor),
            ));
        }
        if let Some(func) = &step.function {
            if uc.function(func).is_none() {
                out.push(Diagnostic::error(
                    "step.unknown_function",
                    format!("{sloc}.function"),
                    format!("`{func}` is not a declared function"),
                ));
            }
        }
    }
}

fn validate_scenario(uc: &UseCase, out: &mut Vec<Diagnostic>) {
    if uc.main_scenario.is_empty() {
        out.push(Diagnostic::error(
            "scenario.empty",
            "main_scenario",
            "the main scenario needs at least one step",
        ));
    }
    validate_steps(uc, &uc.main_scenario, "main_scenario", "scenario.noncontiguous", out);

    let step_indices: BTreeSet<u32> = uc.main_scenario.iter().map(|s| s.index).collect();
    let mut branches = HashSet::new();
    for (i, ext) in uc.extensions.iter().enumerate() {
        let loc = format!("extensions[{i}]");
        match Extension::parse_branch_id(&ext.branch_id) {
            None => out.push(Diagnostic::error(
                "extension.branch_invalid",
                format!("{loc}.branch_id"),
                format!("branch id `{}` must look like `3a`", ext.branch_id),
            )),
            Some((step, _)) if !step_indices.contains(&step) => out.push(Diagnostic::error(
                "extension.unknown_step",
                format!("{loc}.branch_id"),
                format!("branch `{}` refers to missing step {step}", ext.branch_id),
            )),
            Some(_) => {
                if !branches.insert(ext.branch_id.as_str()) {
                    out.push(Diagnostic::error(
                        "extension.duplicate",
                        format!("{loc}.branch_id"),
                        format!("branch `{}` is declared more than once", ext.branch_id),
                    ));
                }
            }
        }
        if blank(&ext.condition) {
            out.push(Diagnostic::error(
                "extension.condition_empty",
                format!("{loc}.condition"),
                "extension condition must not be empty",
            ));
        }
        validate_steps(uc, &ext.steps, &format!("{loc}.steps"), "extension.noncontiguous", out);
    }
}

fn trim_in_place(text: &mut String) {
    let trimmed = text.trim();
    if trimmed.len() != text.len() {
        *text = trimmed.to_string();
    }
}

fn trim_actor(actor: &mut Actor) {
    trim_in_place(&mut actor.name);
}

fn trim_step(step: &mut ScenarioStep) {
    trim_in_place(&mut step.actor);
    trim_in_place(&mut step.action);
}

fn trim_area(area: &mut ApplicationAreaRef) {
    trim_in_place(&mut area.area_id);
    if let Some(label) = &mut area.free_label {
        trim_in_place(label);
    }
}

/// Trims every text field and sorts areas and capability tags. Scenario order
/// is left untouched.
pub fn canonicalize(uc: &UseCase) -> Result<UseCase> {
    canonicalize_with(uc, builtin_taxonomy())
}

pub fn canonicalize_with(uc: &UseCase, taxonomy: &Taxonomy) -> Result<UseCase> {
    let diagnostics = validate_with(uc, taxonomy);
    if has_errors(&diagnostics) {
        return Err(Error::ValidationFailed(diagnostics));
    }
    let mut uc = uc.clone();
    for text in [
        &mut uc.id,
        &mut uc.title,
        &mut uc.intended_purpose,
        &mut uc.context_of_use,
        &mut uc.trigger,
        &mut uc.success_guarantee,
        &mut uc.minimal_guarantee,
    ] {
        trim_in_place(text);
    }
    uc.affective_capabilities.iter_mut().for_each(trim_in_place);
    uc.affective_capabilities.sort();
    trim_actor(&mut uc.user);
    uc.target_persons.iter_mut().for_each(trim_actor);
    uc.secondary_actors.iter_mut().for_each(trim_actor);
    uc.application_areas.iter_mut().for_each(trim_area);
    uc.application_areas.sort();
    for misuse in &mut uc.misuses {
        trim_in_place(&mut misuse.description);
        if let Some(area) = &mut misuse.area_ref {
            trim_area(area);
        }
    }
    for list in [&mut uc.inputs, &mut uc.outputs, &mut uc.preconditions] {
        list.iter_mut().for_each(trim_in_place);
    }
    for func in &mut uc.system_functions {
        trim_in_place(&mut func.label);
    }
    uc.main_scenario.iter_mut().for_each(trim_step);
    for ext in &mut uc.extensions {
        trim_in_place(&mut ext.condition);
        ext.steps.iter_mut().for_each(trim_step);
    }
    for assoc in &mut uc.associations {
        trim_in_place(&mut assoc.actor);
    }
    Ok(uc)
}

use std::collections::HashSet;

use super::lexer::{normalize, tokenize, Token, TokenKind};
use super::{ParseError, SourceSpan};
use crate::model::{
    Actor, ActorKind, ActorRole, ApplicationAreaRef, Association, Extension, GoalLevel, Misuse,
    ScenarioStep, SystemFunction, UseCase, OTHER_AREA,
};

/// Keys accepted inside a `usecase` block. `misuse` and `extension` may repeat.
pub(crate) const FIELD_KEYS: &[&str] = &[
    "id",
    "schema_version",
    "intended_purpose",
    "safety_component",
    "affective_capabilities",
    "user",
    "target_persons",
    "secondary_actors",
    "context_of_use",
    "application_areas",
    "misuse",
    "inputs",
    "outputs",
    "level",
    "preconditions",
    "trigger",
    "success_guarantee",
    "minimal_guarantee",
    "functions",
    "scenario",
    "extension",
    "associations",
];

const REPEATABLE: &[&str] = &["misuse", "extension"];

/// Marker for a failed production; the error itself is already recorded.
pub(crate) struct Failed;

pub(crate) type PResult<T> = Result<T, Failed>;

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    pub(crate) errors: Vec<ParseError>,
}

impl Parser {
    pub(crate) fn new(source: &str) -> Self {
        let source = normalize(source);
        let (tokens, errors) = tokenize(&source);
        Parser {
            tokens,
            pos: 0,
            depth: 0,
            errors,
        }
    }

    pub(crate) fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    pub(crate) fn peek_nth(&self, n: usize) -> &TokenKind {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    pub(crate) fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), TokenKind::Eof)
    }

    pub(crate) fn bump(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        match token.kind {
            TokenKind::LBrace | TokenKind::LBracket | TokenKind::LParen => self.depth += 1,
            TokenKind::RBrace | TokenKind::RBracket | TokenKind::RParen => {
                self.depth = self.depth.saturating_sub(1)
            }
            TokenKind::Eof => return token,
            _ => {}
        }
        self.pos += 1;
        token
    }

    pub(crate) fn depth(&self) -> usize {
        self.depth
    }

    /// Records an error; a second error at the same position is dropped.
    pub(crate) fn error_at(&mut self, span: SourceSpan, code: &str, message: String, expected: &[&str]) {
        if self
            .errors
            .last()
            .is_some_and(|e| (e.span.line, e.span.column) == (span.line, span.column))
        {
            return;
        }
        self.errors.push(ParseError {
            span,
            message,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            code: code.to_string(),
        });
    }

    /// Reports an unexpected token unless the lexer already reported it.
    pub(crate) fn unexpected(&mut self, expected: &[&str]) -> Failed {
        let token = &self.tokens[self.pos];
        if token.kind != TokenKind::Invalid {
            let shown: Vec<String> = expected.iter().map(|e| show_expected(e)).collect();
            let message = format!("expected {}, found {}", shown.join(" or "), token.kind.describe());
            let span = token.span;
            self.error_at(span, "syntax.unexpected", message, expected);
        }
        Failed
    }

    pub(crate) fn expect(&mut self, kind: TokenKind, shown: &str) -> PResult<Token> {
        if *self.peek() == kind {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[shown]))
        }
    }

    /// True at a closing brace; an error at end of input.
    pub(crate) fn at_close(&mut self, alternative: &str) -> PResult<bool> {
        match self.peek() {
            TokenKind::RBrace => Ok(true),
            TokenKind::Eof => Err(self.unexpected(&[alternative, "}"])),
            _ => Ok(false),
        }
    }

    pub(crate) fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == word)
    }

    pub(crate) fn expect_keyword(&mut self, word: &str) -> PResult<()> {
        if self.is_ident(word) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[word]))
        }
    }

    pub(crate) fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    /// Identifier or number.
    pub(crate) fn word(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Ident(s) | TokenKind::Number(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    /// Word or quoted string, for references that may not be bare words.
    pub(crate) fn reference(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Ident(s) | TokenKind::Number(s) | TokenKind::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier", "string"])),
        }
    }

    pub(crate) fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["string"])),
        }
    }

    /// `"[" [ item { "," item } ] "]"`
    pub(crate) fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect(TokenKind::LBracket, "[")?;
        let mut items = Vec::new();
        if *self.peek() == TokenKind::RBracket {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(item(self)?);
            match self.peek() {
                TokenKind::Comma => {
                    self.bump();
                }
                TokenKind::RBracket => {
                    self.bump();
                    return Ok(items);
                }
                _ => return Err(self.unexpected(&[",", "]"])),
            }
        }
    }

    fn at_usecase_start(&self) -> bool {
        self.is_ident("usecase") && matches!(self.peek_nth(1), TokenKind::Str(_))
    }

    /// Skips to the next top-level `usecase` keyword.
    fn skip_to_usecase(&mut self) {
        while !self.at_eof() && !self.at_usecase_start() {
            self.bump();
        }
        self.depth = 0;
    }

    /// After a failed field, skips to something that can continue the block
    /// at `block_depth`: a field key, the closing brace, or a new use case.
    fn recover_in_block(&mut self, block_depth: usize) {
        loop {
            if self.at_eof() || self.at_usecase_start() {
                return;
            }
            if self.depth == block_depth {
                match self.peek() {
                    TokenKind::RBrace => return,
                    TokenKind::Ident(key)
                        if FIELD_KEYS.contains(&key.as_str())
                            && matches!(
                                self.peek_nth(1),
                                TokenKind::Colon | TokenKind::LBrace | TokenKind::Number(_)
                            ) =>
                    {
                        return
                    }
                    _ => {}
                }
            }
            self.bump();
        }
    }
}

/// Parses a whole document. Use cases from blocks without errors are returned
/// even when other blocks fail.
pub fn parse_document(source: &str) -> (Vec<UseCase>, Vec<ParseError>) {
    let mut p = Parser::new(source);
    let mut use_cases = Vec::new();
    while !p.at_eof() {
        if !p.at_usecase_start() {
            p.unexpected(&["usecase"]);
            p.bump();
            p.skip_to_usecase();
            continue;
        }
        let errors_before = p.errors.len();
        let start = p.pos;
        let parsed = parse_usecase(&mut p);
        let had_invalid = p.tokens[start..p.pos]
            .iter()
            .any(|t| t.kind == TokenKind::Invalid);
        match parsed {
            Ok(uc) if p.errors.len() == errors_before && !had_invalid => use_cases.push(uc),
            Ok(_) => {}
            Err(Failed) => p.skip_to_usecase(),
        }
        p.depth = 0;
    }
    p.errors.sort_by_key(|e| (e.span.line, e.span.column));
    (use_cases, p.errors)
}

#[derive(Default)]
struct Draft {
    id: Option<String>,
    intended_purpose: String,
    safety_component: bool,
    affective_capabilities: Vec<String>,
    user: Option<Actor>,
    target_persons: Vec<Actor>,
    secondary_actors: Vec<Actor>,
    context_of_use: String,
    application_areas: Vec<ApplicationAreaRef>,
    misuses: Vec<Misuse>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    level: GoalLevel,
    preconditions: Vec<String>,
    trigger: String,
    success_guarantee: String,
    minimal_guarantee: String,
    system_functions: Vec<SystemFunction>,
    main_scenario: Vec<ScenarioStep>,
    extensions: Vec<Extension>,
    associations: Vec<Association>,
}

fn parse_usecase(p: &mut Parser) -> PResult<UseCase> {
    p.expect_keyword("usecase")?;
    let title = p.string()?;
    p.expect(TokenKind::LBrace, "{")?;
    let block_depth = p.depth();
    let mut draft = Draft::default();
    let mut seen = HashSet::new();

    loop {
        match p.peek().clone() {
            TokenKind::RBrace => break,
            TokenKind::Eof => {
                p.unexpected(&["}", "field"]);
                return Err(Failed);
            }
            TokenKind::Ident(key) if !p.at_usecase_start() => {
                let key_span = p.span();
                if !FIELD_KEYS.contains(&key.as_str()) {
                    p.error_at(
                        key_span,
                        "field.unknown",
                        format!("unknown field `{key}`"),
                        FIELD_KEYS,
                    );
                    p.bump();
                    p.recover_in_block(block_depth);
                    continue;
                }
                if !seen.insert(key.clone()) && !REPEATABLE.contains(&key.as_str()) {
                    p.error_at(
                        key_span,
                        "field.duplicate",
                        format!("field `{key}` is given more than once"),
                        &[],
                    );
                }
                p.bump();
                if parse_field(p, &key, &mut draft).is_err() {
                    p.recover_in_block(block_depth);
                }
            }
            TokenKind::Ident(_) => {
                // A new use case begins before this one closed.
                p.unexpected(&["}"]);
                return Err(Failed);
            }
            _ => {
                p.unexpected(&["}", "field"]);
                p.bump();
                p.recover_in_block(block_depth);
            }
        }
    }
    let close = p.span();
    p.bump();

    let absent = [("id", draft.id.is_none()), ("user", draft.user.is_none())];
    let (Some(id), Some(user)) = (draft.id, draft.user) else {
        let missing: Vec<&str> = absent
            .iter()
            .filter(|(_, absent)| *absent)
            .map(|(field, _)| *field)
            .collect();
        let shown: Vec<String> = missing.iter().map(|f| format!("`{f}`")).collect();
        p.error_at(
            close,
            "field.missing",
            format!("required field(s) {} missing", shown.join(" and ")),
            &missing,
        );
        return Err(Failed);
    };
    Ok(UseCase {
        id,
        title,
        intended_purpose: draft.intended_purpose,
        safety_component: draft.safety_component,
        affective_capabilities: draft.affective_capabilities,
        user,
        target_persons: draft.target_persons,
        secondary_actors: draft.secondary_actors,
        context_of_use: draft.context_of_use,
        application_areas: draft.application_areas,
        misuses: draft.misuses,
        inputs: draft.inputs,
        outputs: draft.outputs,
        level: draft.level,
        preconditions: draft.preconditions,
        trigger: draft.trigger,
        success_guarantee: draft.success_guarantee,
        minimal_guarantee: draft.minimal_guarantee,
        system_functions: draft.system_functions,
        main_scenario: draft.main_scenario,
        extensions: draft.extensions,
        associations: draft.associations,
    })
}

fn colon(p: &mut Parser) -> PResult<()> {
    p.expect(TokenKind::Colon, ":").map(drop)
}

fn parse_field(p: &mut Parser, key: &str, d: &mut Draft) -> PResult<()> {
    match key {
        "id" => {
            colon(p)?;
            d.id = Some(p.reference()?);
        }
        "schema_version" => {
            colon(p)?;
            match p.peek() {
                TokenKind::Ident(_) | TokenKind::Number(_) | TokenKind::Str(_) => {
                    p.bump();
                }
                _ => return Err(p.unexpected(&["string"])),
            }
        }
        "intended_purpose" => {
            colon(p)?;
            d.intended_purpose = p.string()?;
        }
        "context_of_use" => {
            colon(p)?;
            d.context_of_use = p.string()?;
        }
        "trigger" => {
            colon(p)?;
            d.trigger = p.string()?;
        }
        "success_guarantee" => {
            colon(p)?;
            d.success_guarantee = p.string()?;
        }
        "minimal_guarantee" => {
            colon(p)?;
            d.minimal_guarantee = p.string()?;
        }
        "safety_component" => {
            colon(p)?;
            d.safety_component = match p.peek() {
                TokenKind::Ident(s) if s == "true" => true,
                TokenKind::Ident(s) if s == "false" => false,
                _ => return Err(p.unexpected(&["true", "false"])),
            };
            p.bump();
        }
        "level" => {
            colon(p)?;
            let span = p.span();
            let word = p.ident()?;
            d.level = GoalLevel::parse(&word).ok_or_else(|| {
                p.error_at(
                    span,
                    "value.invalid",
                    format!("unknown level `{word}`"),
                    &["summary", "user_goal", "subfunction"],
                );
                Failed
            })?;
        }
        "affective_capabilities" => {
            colon(p)?;
            d.affective_capabilities = p.list(Parser::word)?;
        }
        "application_areas" => {
            colon(p)?;
            d.application_areas = p.list(area_item)?;
        }
        "inputs" => {
            colon(p)?;
            d.inputs = p.list(Parser::string)?;
        }
        "outputs" => {
            colon(p)?;
            d.outputs = p.list(Parser::string)?;
        }
        "preconditions" => {
            colon(p)?;
            d.preconditions = p.list(Parser::string)?;
        }
        "user" => d.user = Some(actor_body(p, ActorRole::User)?),
        "target_persons" => d.target_persons = actor_group(p, "person", ActorRole::TargetPerson)?,
        "secondary_actors" => d.secondary_actors = actor_group(p, "actor", ActorRole::Secondary)?,
        "misuse" => d.misuses.push(misuse_block(p)?),
        "functions" => d.system_functions = functions_block(p)?,
        "scenario" => {
            p.expect(TokenKind::LBrace, "{")?;
            d.main_scenario = steps(p)?;
        }
        "extension" => {
            let branch_id = match p.peek().clone() {
                TokenKind::Number(s) => {
                    p.bump();
                    s
                }
                _ => return Err(p.unexpected(&["branch id such as `3a`"])),
            };
            let condition = p.string()?;
            p.expect(TokenKind::LBrace, "{")?;
            let steps = steps(p)?;
            d.extensions.push(Extension {
                branch_id,
                condition,
                steps,
            });
        }
        "associations" => {
            p.expect(TokenKind::LBrace, "{")?;
            while !p.at_close("identifier")? {
                let actor = p.reference()?;
                p.expect(TokenKind::Arrow, "->")?;
                let function = p.word()?;
                d.associations.push(Association { actor, function });
            }
            p.bump();
        }
        _ => unreachable!("FIELD_KEYS and parse_field disagree on `{key}`"),
    }
    Ok(())
}

/// `ident | "other" "(" string ")"`
pub(crate) fn area_item(p: &mut Parser) -> PResult<ApplicationAreaRef> {
    let id = p.word()?;
    if id == OTHER_AREA && *p.peek() == TokenKind::LParen {
        p.bump();
        let label = p.string()?;
        p.expect(TokenKind::RParen, ")")?;
        Ok(ApplicationAreaRef::other(label))
    } else {
        Ok(ApplicationAreaRef::taxonomy(id))
    }
}

fn actor_body(p: &mut Parser, role: ActorRole) -> PResult<Actor> {
    let open = p.expect(TokenKind::LBrace, "{")?;
    let mut name = None;
    let mut kind = None;
    while !p.at_close("name")? {
        let span = p.span();
        let key = p.ident()?;
        colon(p)?;
        let slot_taken = match key.as_str() {
            "name" => name.replace(p.string()?).is_some(),
            "kind" => {
                let kspan = p.span();
                let word = p.ident()?;
                let parsed = ActorKind::parse(&word).ok_or_else(|| {
                    p.error_at(
                        kspan,
                        "value.invalid",
                        format!("unknown actor kind `{word}`"),
                        &["human", "organization", "system"],
                    );
                    Failed
                })?;
                kind.replace(parsed).is_some()
            }
            _ => {
                p.error_at(span, "field.unknown", format!("unknown actor field `{key}`"), &["name", "kind"]);
                return Err(Failed);
            }
        };
        if slot_taken {
            p.error_at(span, "field.duplicate", format!("field `{key}` is given more than once"), &[]);
        }
    }
    let close = p.bump();
    match (name, kind) {
        (Some(name), Some(kind)) => Ok(Actor { name, kind, role }),
        (name, _) => {
            let field = if name.is_none() { "name" } else { "kind" };
            p.error_at(
                SourceSpan { length: 1, ..close.span },
                "field.missing",
                format!("actor block opened at line {} lacks `{field}`", open.span.line),
                &[field],
            );
            Err(Failed)
        }
    }
}

fn actor_group(p: &mut Parser, item: &str, role: ActorRole) -> PResult<Vec<Actor>> {
    p.expect(TokenKind::LBrace, "{")?;
    let mut actors = Vec::new();
    while !p.at_close(item)? {
        p.expect_keyword(item)?;
        actors.push(actor_body(p, role)?);
    }
    p.bump();
    Ok(actors)
}

fn misuse_block(p: &mut Parser) -> PResult<Misuse> {
    p.expect(TokenKind::LBrace, "{")?;
    p.expect_keyword("description")?;
    colon(p)?;
    let description = p.string()?;
    let area_ref = if p.is_ident("area") {
        p.bump();
        colon(p)?;
        Some(area_item(p)?)
    } else {
        None
    };
    p.expect(TokenKind::RBrace, "}")?;
    Ok(Misuse {
        description,
        area_ref,
    })
}

/// `{ ident ":" string [ "{" { ("includes" | "extends") ":" list } "}" ] }`
fn functions_block(p: &mut Parser) -> PResult<Vec<SystemFunction>> {
    p.expect(TokenKind::LBrace, "{")?;
    let mut functions = Vec::new();
    while !p.at_close("identifier")? {
        let id = p.word()?;
        colon(p)?;
        let label = p.string()?;
        let mut func = SystemFunction::new(id, label);
        if *p.peek() == TokenKind::LBrace {
            p.bump();
            while !p.at_close("includes")? {
                let span = p.span();
                let key = p.ident()?;
                colon(p)?;
                let targets = p.list(Parser::word)?;
                match key.as_str() {
                    "includes" => func.includes.extend(targets),
                    "extends" => func.extends.extend(targets),
                    _ => {
                        p.error_at(
                            span,
                            "field.unknown",
                            format!("unknown function annotation `{key}`"),
                            &["includes", "extends"],
                        );
                        return Err(Failed);
                    }
                }
            }
            p.bump();
        }
        functions.push(func);
    }
    p.bump();
    Ok(functions)
}

/// Steps until the closing brace, which is consumed.
fn steps(p: &mut Parser) -> PResult<Vec<ScenarioStep>> {
    let mut steps = Vec::new();
    while !p.at_close("step number")? {
        let index = match p.peek().clone() {
            TokenKind::Number(n) if n.bytes().all(|b| b.is_ascii_digit()) => {
                let span = p.span();
                p.bump();
                n.parse::<u32>().map_err(|_| {
                    p.error_at(span, "value.invalid", format!("step index `{n}` is too large"), &[]);
                    Failed
                })?
            }
            _ => return Err(p.unexpected(&["step number", "}"])),
        };
        let actor = p.reference()?;
        colon(p)?;
        let action = p.string()?;
        let function = if *p.peek() == TokenKind::Arrow {
            p.bump();
            Some(p.word()?)
        } else {
            None
        };
        steps.push(ScenarioStep {
            index,
            actor,
            action,
            function,
        });
    }
    p.bump();
    Ok(steps)
}

fn show_expected(item: &str) -> String {
    match item {
        "identifier" | "string" | "field" | "step number" | "end of input" => item.to_string(),
        _ if item.contains(' ') => item.to_string(),
        _ => format!("`{item}`"),
    }
}

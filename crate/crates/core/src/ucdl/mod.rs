//! UCDL, the Use-Case Description Language.
//!
//! ```text
//! document    = { usecase } ;
//! usecase     = "usecase" string "{" { field } "}" ;
//! field       = scalar | list_field | actor_blk | targets_blk | secondary_blk
//!             | functions_blk | scenario_blk | extension_blk | misuse_blk
//!             | associations_blk ;
//! scalar      = key ":" ( string | bool | ident ) ;
//! list_field  = key ":" "[" [ item { "," item } ] "]" ;
//! item        = ident | "other" "(" string ")" | string ;
//! actor_blk   = "user" "{" "name" ":" string "kind" ":" ident "}" ;
//! targets_blk = "target_persons" "{" { "person" actor_body } "}" ;
//! secondary_blk = "secondary_actors" "{" { "actor" actor_body } "}" ;
//! functions_blk = "functions" "{" { ident ":" string [ "{" annotations "}" ] } "}" ;
//! annotations = { ( "includes" | "extends" ) ":" "[" idents "]" } ;
//! scenario_blk  = "scenario" "{" { step } "}" ;
//! step        = integer actor_ref ":" string [ "->" ident ] ;
//! extension_blk = "extension" branch_id string "{" { step } "}" ;
//! misuse_blk  = "misuse" "{" "description" ":" string [ "area" ":" item ] "}" ;
//! associations_blk = "associations" "{" { actor_ref "->" ident } "}" ;
//! string      = '"' chars '"' | '"""' raw chars '"""' ;
//! ```
//!
//! `#` starts a line comment. Duplicate keys and unknown keys are errors;
//! `schema_version` is accepted and ignored.

mod lexer;
mod parser;
mod writer;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Diagnostic;

pub use parser::parse_document;
pub use writer::{serialize_canonical, serialize_canonical_with};

pub(crate) use lexer::TokenKind;
pub(crate) use parser::{Failed, PResult, Parser};

/// 1-based line and column (in characters) plus a length in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
    /// Stable identifier such as `syntax.unexpected` or `field.duplicate`.
    pub code: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: error[{}]: {}",
            self.span.line, self.span.column, self.code, self.message
        )
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    /// As an error diagnostic located at `line:column`.
    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(
            &self.code,
            format!("{}:{}", self.span.line, self.span.column),
            self.message.clone(),
        )
    }
}

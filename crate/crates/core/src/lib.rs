//! Compiler for documented AI use cases.
//!
//! A use case is written in UCDL (see [`ucdl`]), checked against the schema of
//! information elements a risk assessment needs ([`model::validate_use_case`]),
//! classified into one of the four risk tiers ([`risk::classify`]), and
//! rendered as a UML use-case diagram ([`diagram`]) and a documentation table
//! ([`docgen`]). Collections of use cases are indexed by [`catalog`].

pub mod catalog;
pub mod diagram;
pub mod docgen;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod risk;
pub mod ucdl;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use crate::error::Error;
pub use crate::model::{
    risk_order, validate_use_case, ActorKind, ActorRole, Diagnostic, RiskLevel, Severity, UseCase,
};
pub use crate::risk::{builtin_taxonomy, classify, explain, RiskAssessment, Taxonomy};
pub use crate::ucdl::{parse_document, serialize_canonical, ParseError, SourceSpan};

use crate::model::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation failed with {} error(s)", count_errors(.0))]
    ValidationFailed(Vec<Diagnostic>),
    #[error("malformed svg: {0}")]
    MalformedSvg(String),
    #[error("{code}: {message}")]
    Query { code: &'static str, message: String },
    #[error("taxonomy: {0}")]
    Taxonomy(String),
    #[error("catalog: {0}")]
    Catalog(String),
}

fn count_errors(diagnostics: &[Diagnostic]) -> usize {
    diagnostics.iter().filter(|d| d.is_error()).count()
}

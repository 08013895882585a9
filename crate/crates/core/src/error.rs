use thiserror::Error;

use crate::formula::ParseError;
use crate::nmatrix::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("invalid nmatrix: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("invalid counter machine: {0}")]
    Machine(String),

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("matrix `{0}` is not deterministic")]
    NonDeterministic(String),

    #[error("unknown truth value `{0}`")]
    UnknownValue(String),

    #[error("value name `{0}` already uses the reserved tilde suffix")]
    ReservedSuffix(String),

    #[error("variable p{index} exceeds arity {arity}")]
    VariableOutOfRange { index: u32, arity: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("corpus integrity failure: {0}")]
    Corpus(String),

    #[error("unrecognised artifact: {0}")]
    Artifact(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

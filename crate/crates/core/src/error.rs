use thiserror::Error;

use crate::pauli::AlgebraSpec;

/// Errors raised by the workbench. Every variant maps onto a stable
/// machine-readable `kind` string used by the command-line reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("algebra spec mismatch: {left} vs {right}")]
    SpecMismatch { left: AlgebraSpec, right: AlgebraSpec },

    #[error("invalid algebra spec: {0}")]
    InvalidSpec(String),

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("zero-probability outcome (p = {0:e})")]
    ZeroProbability(f64),

    #[error("map is not completely positive: Choi eigenvalue {eigenvalue:e}")]
    NotCompletelyPositive { eigenvalue: f64 },

    #[error("generators do not commute: {0} and {1}")]
    NonCommuting(String, String),

    #[error("stabilizer group contains a nontrivial multiple of the identity")]
    InconsistentPhases,

    #[error("group order exceeds the enumeration cap {0}")]
    GroupTooLarge(usize),

    #[error("operator does not projectively commute with {0}")]
    NotProjectivelyCommuting(String),

    #[error("Knill-Laflamme conditions fail: {0}")]
    KnillLaflamme(String),

    #[error("shadow scheme is not tomographically complete")]
    IncompleteScheme,

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("malformed json: {0}")]
    Json(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SpecMismatch { .. } => "spec_mismatch",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::DimensionOverflow { .. } => "dimension_overflow",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported_input",
            Error::ZeroProbability(_) => "zero_probability",
            Error::NotCompletelyPositive { .. } => "not_cp",
            Error::NonCommuting(..) => "non_commuting",
            Error::InconsistentPhases => "inconsistent_phases",
            Error::GroupTooLarge(_) => "group_too_large",
            Error::NotProjectivelyCommuting(_) => "not_projectively_commuting",
            Error::KnillLaflamme(_) => "knill_laflamme",
            Error::IncompleteScheme => "incomplete_scheme",
            Error::Syntax { .. } => "syntax",
            Error::UnknownName(_) => "unknown_name",
            Error::Empty(_) => "empty_input",
            Error::Json(_) => "json",
        }
    }

    pub fn position(&self) -> Option<usize> {
        match self {
            Error::Syntax { position, .. } => Some(*position),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

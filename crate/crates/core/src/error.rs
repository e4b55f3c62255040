use thiserror::Error;

/// Errors raised while building operators, states and relations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("total dimension {requested} exceeds the configured maximum {max}")]
    Capacity { requested: usize, max: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for {len} factors")]
    Index { index: usize, len: usize },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("numerical integrity check failed: {0}")]
    NumericalIntegrity(String),

    #[error("projection onto the {0} sector is empty")]
    EmptySector(String),

    #[error("spin must be positive for spin relations")]
    DegenerateSpin,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error ({invariant}): {detail}")]
    Validation { invariant: String, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

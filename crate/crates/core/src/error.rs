use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported operation for this law: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("value not representable: {0}")]
    Range(String),

    #[error("precision exhausted: {0}; retry in Extended mode")]
    Precision(String),

    #[error("sandwich violation: {0}")]
    SandwichViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

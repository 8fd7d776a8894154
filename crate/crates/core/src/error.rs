use thiserror::Error;

/// Errors produced by the analysis and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric error: non-finite value at time index {time_index}, cell {cell}")]
    NonFinite { time_index: usize, cell: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("region exits the grid domain: {0}")]
    OutOfDomain(String),

    #[error("scheme failure at step {step}, cell {cell}: value {value}")]
    SchemeFailure { step: usize, cell: usize, value: f64 },

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

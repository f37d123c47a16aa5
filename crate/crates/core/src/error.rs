use thiserror::Error;

/// Errors raised across the search engine.
#[derive(Debug, Error)]
pub enum QnasError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed DAG: {0}")]
    MalformedDag(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("degenerate generator for gate {0}: unitary is identity-equivalent")]
    DegenerateGenerator(String),

    #[error("missing gate-table entry for {0}")]
    MissingTableEntry(String),

    #[error("transport problem error: {0}")]
    Transport(String),

    #[error("GP conditioning error: {0}")]
    Conditioning(String),

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, QnasError>;

use thiserror::Error;

/// Errors produced by dataset construction, file IO, and experiment
/// configuration. Violations of algorithmic preconditions (dimension
/// mismatches, empty center lists, out-of-range indices) panic instead;
/// they are programming errors, not recoverable conditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("inconsistent row length at row {row}: expected {expected} fields, got {got}")]
    RaggedRow { row: usize, expected: usize, got: usize },

    #[error("unparseable numeric field at row {row}, column {col}: {value:?}")]
    BadField { row: usize, col: usize, value: String },

    #[error("requested k = {k} exceeds number of points n = {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: String, msg: String },

    #[error("value {value} at row {row}, column {col} is outside [0, 1]")]
    OutOfRange { row: usize, col: String, value: f64 },

    #[error("duplicate column name: {0}")]
    DuplicateColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid plant spec: {0}")]
    InvalidPlant(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("column arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("parameter vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error(
        "exact enumeration would produce {combinations} rows, above the cap of {cap}; \
         use Monte-Carlo sampling instead"
    )]
    ExactCapExceeded { combinations: u128, cap: u64 },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),
}

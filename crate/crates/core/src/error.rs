use thiserror::Error;

/// Errors raised by point-set ingestion and the discrepancy engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("format error on line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("coordinate {value} at row {row}, column {column} is outside [0, 1)")]
    Domain { row: usize, column: usize, value: f64 },

    #[error("empty input: the dimension cannot be inferred, pass a dimension hint")]
    AmbiguousDimension,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("level {level} exceeds the supported maximum of {max}")]
    LevelTooDeep { level: u32, max: u32 },

    #[error("search too large: {0}")]
    SearchTooLarge(String),

    #[error("oracle size guard exceeded: {0}")]
    OracleGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by parsing, validation and analysis.
#[derive(Debug, Error)]
pub enum GameError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("resource budget exceeded: {0}")]
    Budget(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GameError>;

use thiserror::Error;

/// Errors produced by the estimators, density models and numeric engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("sample set is empty")]
    EmptySamples,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value at x = {x}: {context}")]
    Numeric { x: f64, context: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

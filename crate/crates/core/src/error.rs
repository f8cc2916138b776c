use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CidError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CidError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for cloud of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CidError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CidError::InvalidInput(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        CidError::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CidError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI error JSON and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            CidError::InvalidInput(_) => "invalid_input",
            CidError::DimensionMismatch { .. } => "dimension_mismatch",
            CidError::IndexOutOfRange { .. } => "index_out_of_range",
            CidError::Parse { .. } => "parse",
            CidError::Io { .. } => "io",
            CidError::Json(_) => "json",
        }
    }
}

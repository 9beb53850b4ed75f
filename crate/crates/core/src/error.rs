use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("interaction information is only defined here for 2 or 3 attributes, got {0}")]
    UnsupportedArity(usize),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("column `{0}` has no usable (non-missing) values")]
    UnusableColumn(String),

    #[error("schema mismatch at column `{column}`: {message}")]
    Schema { column: String, message: String },

    #[error("cannot generate benchmark split: {0}")]
    Generation(String),

    #[error("stability index undefined: {0}")]
    UndefinedStability(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

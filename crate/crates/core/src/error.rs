use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sparsity pattern {n}:{m}: {reason}")]
    InvalidPattern { n: usize, m: usize, reason: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal error: block {block} is infeasible after rounding")]
    InfeasibleInternal { block: usize },

    #[error("magnitude {value} is outside the integer cost range")]
    Scale { value: f64 },

    #[error("block side {m} exceeds the enumeration limit of {limit}")]
    Size { m: usize, limit: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("parse error at row {row}, column {col}: {reason}")]
    Parse { row: usize, col: usize, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format { path: path.into(), reason: reason.into() }
    }
}

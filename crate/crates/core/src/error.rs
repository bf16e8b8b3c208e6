use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("need at least two groups")]
    TooFewGroups,

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("too large for exact solver: {0}")]
    TooLarge(String),

    #[error("k-means requires coordinates")]
    NeedsCoordinates,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid experiment configuration (bad dimension, grid, sample sizes, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// A call violated an operation's input contract.
    #[error("usage error: {0}")]
    Usage(String),
    /// Inputs exist but are unusable, e.g. a trajectory too short for the budget grid.
    #[error("data error: {0}")]
    Data(String),
    #[error("not found: {0}")]
    NotFound(String),
    /// Persisted payload is malformed or from an incompatible format version.
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

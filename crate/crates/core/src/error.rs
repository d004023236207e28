use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and its diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid initial condition: {0}")]
    InitialCondition(String),

    #[error("non-finite value at site ({i}, {j}): {what}")]
    NonFinite { i: usize, j: usize, what: &'static str },

    #[error("diagnostic undefined: {0}")]
    Undefined(String),

    #[error("power-law fit rejected: {0}")]
    Fit(String),

    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

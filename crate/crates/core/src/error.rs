use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
///
/// Validation problems (bad input files, bad bandwidths, out-of-range
/// arguments) are kept apart from numerical failures so front ends can map
/// them to different exit codes via [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Input {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("schema: {0}")]
    Schema(String),

    #[error("bandwidth for variable `{name}` is {value}, outside its admissible range {interval}")]
    BandwidthOutOfRange {
        name: String,
        value: f64,
        interval: String,
    },

    #[error("kernel domain error: {0}")]
    KernelDomain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid dissimilarity matrix: {0}")]
    InvalidMatrix(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }

    pub(crate) fn input(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Input {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

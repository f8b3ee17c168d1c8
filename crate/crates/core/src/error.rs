use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violates a type invariant or a flag is malformed.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no sources")]
    NoSources,

    #[error("insufficient snapshots for centering: need at least 2, got {0}")]
    InsufficientSnapshots(usize),

    #[error("degenerate element variance at element {element} ({variance:e})")]
    DegenerateVariance { element: usize, variance: f64 },

    #[error("matrix not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("need at least {needed} eigenvalues, got {got}")]
    TooFewEigenvalues { needed: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid value {value} for axis {axis}: {reason}")]
    InvalidAxisValue {
        axis: String,
        value: f64,
        reason: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from user configuration rather than from a
    /// runtime or I/O failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::NoSources
                | Error::Precondition(_)
                | Error::InvalidAxisValue { .. }
                | Error::Parse(_)
        )
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no seasonal component")]
    NoSeasonalComponent,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("subset does not straddle shift at t={0}")]
    SubsetDoesNotStraddleShift(usize),

    #[error("subset has {got} observations, need at least {need}")]
    SubsetTooSmall { got: usize, need: usize },

    #[error("singular design")]
    Singular,

    #[error("degenerate series: no non-singular elemental subset at position {position}")]
    DegenerateSeries { position: usize },

    #[error("no identifiable shift model")]
    NoIdentifiableShift,

    #[error("interval [{start}, {end}] outside 1..={len}")]
    IntervalOutOfRange { start: usize, end: usize, len: usize },

    #[error("{}: row {row}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical pipeline, as opposed to bad input
    /// or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular
                | Error::DegenerateSeries { .. }
                | Error::NoIdentifiableShift
                | Error::SubsetDoesNotStraddleShift(_)
                | Error::SubsetTooSmall { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

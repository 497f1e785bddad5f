//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: need at least {min} observations, got {got}")]
    TooShort { min: usize, got: usize },

    #[error("non-finite observation at position {index} (1-based)")]
    NonFinite { index: usize },

    #[error("labels length {labels} does not match series length {values}")]
    LabelMismatch { labels: usize, values: usize },

    #[error("gamma must lie in [0, 0.5), got {0}")]
    InvalidGamma(f64),

    #[error("weight argument must lie in (0, 1), got {0}")]
    InvalidWeightArg(f64),

    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),

    #[error("lag {lag} out of range for {n} values")]
    LagOutOfRange { lag: usize, n: usize },

    #[error("degenerate variance ({0:e}); refusing to normalize")]
    DegenerateVariance(f64),

    #[error("blocks must satisfy n >= 10*blocks (n = {n}, blocks = {blocks})")]
    TooFewPerBlock { n: usize, blocks: usize },

    #[error("grid must be at least 2, got {0}")]
    InvalidGrid(u32),

    #[error("reps must be at least 100, got {0}")]
    InvalidReps(u32),

    #[error("segment out of bounds: start {start} + length {len} > n = {n}")]
    SegmentOutOfBounds { start: usize, len: usize, n: usize },

    #[error("empty series in {path}")]
    EmptyInput { path: PathBuf },

    #[error("{path}: row {row}: cannot parse {what}: {text:?}")]
    Parse {
        path: PathBuf,
        row: usize,
        what: &'static str,
        text: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid {what}: {text:?}")]
    InvalidArgument { what: &'static str, text: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

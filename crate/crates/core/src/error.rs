use thiserror::Error;

/// Unified error type for the crate.
///
/// Numerical routines return `Domain` for arguments outside their contract
/// (non-finite inputs, parameters off their valid range), `DimensionMismatch`
/// when array shapes disagree, and `Solver` when an iteration diverges; the
/// solver error carries the objective trace up to the failure so callers can
/// inspect what happened.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver failed after {iterations} iterations: {message}")]
    Solver {
        message: String,
        iterations: usize,
        /// Objective values recorded up to the failure.
        trace: Vec<f64>,
    },

    #[error("fixed-point search failed: {0}")]
    FixedPoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Shorthand for a `Domain` error.
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Shorthand for a `Config` error.
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

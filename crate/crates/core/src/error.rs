use thiserror::Error;

use crate::curriculum::ScoreCurve;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Power iteration did not reach the requested residual.
    #[error("stationary distribution did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// The covariance has (numerically) zero eigenvalues; `null_dims`
    /// indexes the offending eigen-directions in descending eigenvalue order.
    #[error("covariance is rank deficient: {} of {dimension} eigenvalues are zero (eigen-directions {null_dims:?})", null_dims.len())]
    RankDeficient {
        null_dims: Vec<usize>,
        dimension: usize,
    },

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    /// A trainer or metric failed part-way through a curriculum sweep. The
    /// scores of the stages completed before the failure are kept.
    #[error("curriculum stage {stage} failed: {source}")]
    StageFailed {
        stage: usize,
        partial: Box<ScoreCurve>,
        #[source]
        source: Box<Error>,
    },

    #[error("trainer does not support warm starts, which active-set training requires")]
    WarmStartUnsupported,

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed feature file; `location` names the row or byte offset.
    #[error("malformed input at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mean must be positive and finite (got {0})")]
    InvalidMean(f64),

    #[error("mean photon number {mean} is above the PMF cap {cap}; use the continuum sampler")]
    UseContinuumSampler { mean: f64, cap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("undefined estimator: {0}")]
    UndefinedEstimator(String),

    #[error("fit did not converge after {iterations} iterations (last iterate {last:?})")]
    FitNonConvergence { iterations: usize, last: Vec<f64> },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UndefinedEstimator(_) | Error::FitNonConvergence { .. } | Error::DegenerateFit(_)
        )
    }

    /// Rejected input values.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidMean(_) | Error::InvalidParameter(_) | Error::UseContinuumSampler { .. }
        )
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

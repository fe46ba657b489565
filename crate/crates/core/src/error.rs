use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("step size {gamma} outside admissible range (0, {limit})")]
    StepSizeOutOfRange { gamma: f64, limit: f64 },

    #[error("metric proximity of {prox} is not supported under a {metric} metric")]
    UnsupportedMetric {
        prox: &'static str,
        metric: &'static str,
    },

    #[error("dual threshold search left KKT residual {residual:e} after {steps} bisection steps")]
    BisectionFailed { residual: f64, steps: usize },

    #[error("operator norm estimate {value} uncertified after {iterations} iterations")]
    NormEstimateUncertified { value: f64, iterations: usize },

    #[error("non-finite iterate at iteration {k}")]
    NonFiniteIterate { k: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

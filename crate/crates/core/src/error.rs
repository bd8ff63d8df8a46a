use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("unsupported analytic case: {0}")]
    UnsupportedCase(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The integrator left the physical state space; a smaller step usually fixes it.
    #[error("integration failure at t = {time}: {reason} (try dt <= {suggested_dt:e})")]
    IntegrationFailure {
        time: f64,
        reason: String,
        suggested_dt: f64,
    },

    #[error("invariant violated: {invariant}: {detail}")]
    InvariantViolation { invariant: String, detail: String },

    #[error(
        "grid too coarse: divergences {separation:.4} apart need a step of at most {suggested_step:e}"
    )]
    ResolutionFailure {
        separation: f64,
        suggested_step: f64,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            invariant: invariant.into(),
            detail: detail.into(),
        }
    }
}

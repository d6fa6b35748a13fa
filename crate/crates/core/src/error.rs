use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(f64),

    /// Result (or an intermediate) would leave the floating range.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The exact solver reached a state that is impossible for balanced inputs.
    #[error("transport solver failure: {0}")]
    SolverFailure(String),

    #[error("sinkhorn did not converge in {iterations} iterations (marginal error {error:e})")]
    NonConvergence { iterations: usize, error: f64 },

    #[error("parameter outside the feasible set: {0}")]
    InfeasibleTheta(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

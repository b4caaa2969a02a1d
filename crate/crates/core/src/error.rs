use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    Dimension(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("grid has a node at the origin; use the half-cell offset")]
    NodeAtOrigin,
    #[error("pointwise potential matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence { iterations: usize, best_residual: f64 },
    #[error("eigenpair residual {0:e} exceeds the convergence requirement")]
    Unconverged(f64),
    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed field container: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

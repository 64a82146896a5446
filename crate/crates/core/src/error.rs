use thiserror::Error;

/// Errors raised by the lattice, model and spectral routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate pattern: {0}")]
    DegeneratePattern(String),

    #[error("gap closes: smallest singular value {sigma_min:.3e} at k = {k:?}")]
    GapClosed { sigma_min: f64, k: [f64; 3] },

    #[error("model is critical: minimum half-gap {gap:.3e} below threshold {threshold:.1e}")]
    Critical { gap: f64, threshold: f64 },

    #[error("neighborhood of site {site} is not a 3x3 square patch: {reason}")]
    IrregularNeighborhood { site: usize, reason: String },

    #[error("dimension {dim} exceeds the dense-solver cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("coincident points: kernel is singular at x = y")]
    CoincidentPoints,

    #[error("point at distance {dist:.6e} is on or inside the hole of radius {eps:.6e}")]
    InsideHole { dist: f64, eps: f64 },

    #[error("point is outside the domain")]
    OutsideDomain,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("solver did not converge: boundary residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NonConverged { residual: f64, tol: f64 },

    #[error("iteration did not converge: {0}")]
    IterationFailed(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

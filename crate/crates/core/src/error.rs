use thiserror::Error;

use crate::expr::ExprError;

/// Errors raised anywhere in the geometry and certification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("immersion degenerates at u = {point:?}: smallest singular value {sigma_min:.3e} <= {tol:.1e}")]
    Immersion {
        point: Vec<f64>,
        sigma_min: f64,
        tol: f64,
    },

    #[error("CR split failed: {0}")]
    CrSplit(String),

    #[error("frame is not orthonormal (residual {residual:.3e})")]
    NonOrthonormalFrame { residual: f64 },

    #[error("invalid block sizes {sizes:?} for dimension {dim}: {reason}")]
    BlockSize {
        sizes: Vec<usize>,
        dim: usize,
        reason: String,
    },

    #[error("objective returned a non-finite value ({0})")]
    Objective(f64),

    #[error("plane tuple re-orthogonalization degenerated (pivot {pivot:.3e})")]
    Feasibility { pivot: f64 },

    #[error("plane is not J-invariant (residual {residual:.3e})")]
    NotJInvariant { residual: f64 },

    #[error("ambient sectional curvature {observed:.6} exceeds the supplied bound {bound}")]
    BoundViolation { bound: f64, observed: f64 },

    #[error("operation requires a flat ambient space")]
    AmbientMismatch,

    #[error("{0}")]
    Config(String),

    #[error("{path}:{line}:{column}: {message}")]
    ChartFile {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by every module.

use thiserror::Error;

/// Failures raised by the numerical kernels, solvers and file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix exponential saturates the floating range (t * abscissa = {0:.3e})")]
    Saturation(f64),

    #[error("shift {0} lies within the conditioning threshold of the spectrum")]
    NearSingular(String),

    #[error("weight is not Hermitian positive definite (lambda_min = {min:.3e}, lambda_max = {max:.3e})")]
    InvalidWeight { min: f64, max: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("operator is not a contraction (norm = {0:.6})")]
    NotContraction(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sequence window error: {0}")]
    Window(String),

    #[error("eigen-solver failed to converge: {0}")]
    Convergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;

//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors surfaced by matrix arithmetic, generators and searches.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error(
        "eigensolver did not converge: off-diagonal norm {off_norm:.3e} after {sweeps} sweeps"
    )]
    SpectralFailure { off_norm: f64, sweeps: usize },

    #[error(
        "matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.6e} < -{tol:.1e}"
    )]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds {tol:.1e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("non-finite value at entry ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("exterior algebra rank {k} outside supported range 1..={max}")]
    RankOutOfRange { k: usize, max: usize },

    #[error("dimension cap exceeded: {requested} > {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("Gram matrix has negative entry {value:.6e} at ({row}, {col})")]
    GramHasNegativeEntry { row: usize, col: usize, value: f64 },

    #[error("vector {index} has negative coordinate {value:.6e} at position {coord}")]
    NotInOrthant {
        index: usize,
        coord: usize,
        value: f64,
    },

    #[error("factorization residual {residual:.6e} exceeds threshold {threshold:.1e}")]
    ResidualTooHigh { residual: f64, threshold: f64 },

    #[error("expected {expected} items, got {actual}")]
    ArityError { expected: usize, actual: usize },

    #[error("random configuration generator exhausted its budget of {budget} attempts")]
    GenerationFailure { budget: usize },

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

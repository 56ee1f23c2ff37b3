use thiserror::Error;

/// Errors produced by the entanglement toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("matrix is not Hermitian: max |H - H^dagger| = {deviation:.3e} exceeds {tol:.1e}")]
    NonHermitian { deviation: f64, tol: f64 },

    #[error("trace deviates from 1 by {deviation:.3e}")]
    TraceNotUnit { deviation: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("vector norm deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation needs a bipartite state, got dims {0:?}")]
    NotBipartite(Vec<usize>),

    #[error("state has a positive partial transpose (minimum eigenvalue {min_eigenvalue:.3e})")]
    PositivePartialTranspose { min_eigenvalue: f64 },

    #[error("witness kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("expectation value has imaginary part {0:.3e}")]
    NonRealExpectation(f64),

    #[error("recurrence step success probability {0:.3e} is degenerate")]
    DegenerateInput(f64),

    #[error("fidelity {fidelity} does not improve under the recurrence map (needs F > 1/2)")]
    NonImproving { fidelity: f64 },

    #[error("operator of dimension {dim} exceeds the budget of {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("ensemble size {size} is smaller than the state rank {rank}")]
    EnsembleTooSmall { size: usize, rank: usize },

    #[error("shift post-check failed: minimum product expectation {0:.3e} after shift")]
    ShiftCheckFailed(f64),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

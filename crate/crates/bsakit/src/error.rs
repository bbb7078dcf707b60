use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max deviation {0:e}")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite: eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("eigensolver did not converge within the sweep cap")]
    NoConvergence,
    #[error("vectors are linearly dependent: Gram determinant magnitude {0:e}")]
    DependentSet(f64),
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("state is not entangled: max p_i = {0}")]
    NotEntangled(f64),
    #[error("pure input: max p_i = 1, nothing to decompose")]
    PureInput,
    #[error("state is not on the separable boundary: p1' - p2' - p3' - p4' = {0:e}")]
    NotOnBoundary(f64),
    #[error("optimality certificate failed: {0}")]
    CertificateFailed(String),
    #[error("map annihilates the state: trace {0:e}")]
    Annihilated(f64),
    #[error("map is not invertible: filtration |a| = {0}")]
    NotInvertible(f64),
    #[error("degenerate pair: |D| = {0:e}")]
    DegeneratePair(f64),
    #[error("no feasible decomposition found")]
    Infeasible,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

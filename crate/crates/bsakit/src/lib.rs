//! Two-qubit entanglement toolkit: Wootters concurrence, PPT separability,
//! optimal Lewenstein-Sanpera decompositions of Bell-diagonal states with
//! their product-state ensembles, transport of whole decompositions under
//! local filtering maps, and a brute-force best-separable-approximation
//! search used to certify optimality independently.

pub mod entanglement;
pub mod error;
pub mod io;
pub mod lqcc;
pub mod lsd;
pub mod matrix;
pub mod oracle;
pub mod qstate;

pub use error::Error;
pub use matrix::{ComplexMatrix, ComplexVector, Tolerances};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

//! Entanglement quantities: mixed-state concurrence via the R-matrix,
//! the closed-form Bell-diagonal shortcut, pure-state concurrence,
//! entanglement of formation, and PPT separability certification.

use serde::Serialize;

use crate::error::Result;
use crate::matrix::{
    hermitian_eigen, matrix_sqrt_psd, partial_transpose, Tolerances,
};
use crate::qstate::{spin_flip, spin_flip_vec, BellDiagonal, DensityMatrix, PureState};

/// R-matrix eigenvalues (descending) and the concurrence they produce.
#[derive(Debug, Clone, Serialize)]
pub struct ConcurrenceReport {
    pub lambdas: [f64; 4],
    pub concurrence: f64,
}

/// PPT verdict together with the witnessing eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityVerdict {
    pub separable: bool,
    pub min_pt_eigenvalue: f64,
}

/// Concurrence of a mixed state from the eigenvalues of
/// R = sqrt(sqrt(rho) rho_tilde sqrt(rho)).
///
/// The Hermitian chain is used rather than the non-Hermitian product
/// rho rho_tilde so only the Hermitian eigensolver is needed; the two
/// routes agree in exact arithmetic.
pub fn concurrence(rho: &DensityMatrix, tol: &Tolerances) -> Result<ConcurrenceReport> {
    let s = matrix_sqrt_psd(rho.matrix(), tol)?;
    let inner = s.mul(&spin_flip(rho.matrix())).mul(&s).hermitian_part();
    let (vals, _) = hermitian_eigen(&inner, tol)?;
    // Eigenvalues of R are square roots of those of the chain.
    let mut lambdas = [0.0f64; 4];
    for (slot, v) in lambdas.iter_mut().zip(&vals) {
        *slot = v.max(0.0).sqrt();
    }
    let c = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    Ok(ConcurrenceReport {
        lambdas,
        concurrence: c.min(1.0),
    })
}

/// Closed-form concurrence of a Bell-diagonal state: max(0, 2 max_i p_i - 1).
pub fn concurrence_bd(bd: &BellDiagonal) -> f64 {
    (2.0 * bd.max_p() - 1.0).max(0.0)
}

/// Concurrence of a pure state: |<psi|psi_tilde>|.
pub fn pure_concurrence(psi: &PureState) -> f64 {
    psi.vector().dot(&spin_flip_vec(psi.vector())).norm()
}

/// Logarithm base for the binary entropy in the entanglement of formation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyBase {
    Natural,
    Two,
}

fn binary_entropy(x: f64, base: EntropyBase) -> f64 {
    // H(0) = H(1) = 0 by continuity.
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let h = -x * x.ln() - (1.0 - x) * (1.0 - x).ln();
    match base {
        EntropyBase::Natural => h,
        EntropyBase::Two => h / std::f64::consts::LN_2,
    }
}

/// Entanglement of formation from a concurrence value.
pub fn eof_from_concurrence(c: f64, base: EntropyBase) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 + 0.5 * (1.0 - c * c).sqrt(), base)
}

/// Entanglement of formation E = H(1/2 + 1/2 sqrt(1 - C^2)), natural log.
pub fn entanglement_of_formation(rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(eof_from_concurrence(
        concurrence(rho, tol)?.concurrence,
        EntropyBase::Natural,
    ))
}

/// PPT separability check: separable iff the partial transpose is PSD.
/// Necessary and sufficient in 2x2.
pub fn is_separable(rho: &DensityMatrix, tol: &Tolerances) -> Result<SeparabilityVerdict> {
    let pt = partial_transpose(rho.matrix());
    let (vals, _) = hermitian_eigen(&pt, tol)?;
    let min = vals.last().copied().unwrap_or(0.0);
    Ok(SeparabilityVerdict {
        separable: min >= -tol.psd,
        min_pt_eigenvalue: min,
    })
}

//! Two-qubit state model: validated density matrices, the Bell basis,
//! Bell-diagonal parametrization, the spin-flip operation and pure states.
//!
//! Computational-basis ordering is fixed as {uu, ud, du, dd}.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Dirichlet, Distribution};

use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigen, kron, ComplexMatrix, ComplexVector, Tolerances};

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ])
}

/// sigma_y tensor sigma_y, the spin-flip conjugator.
pub fn sigma_yy() -> ComplexMatrix {
    kron(&pauli_y(), &pauli_y())
}

/// Validated 4x4 two-qubit density matrix: Hermitian, unit trace, PSD.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::DimMismatch {
                expected: 4,
                got: m.dim(),
            });
        }
        let defect = m.hermiticity_defect();
        if defect > tol.herm {
            return Err(Error::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "trace {} is not 1",
                tr.re
            )));
        }
        let (vals, _) = hermitian_eigen(&m, tol)?;
        if let Some(min) = vals.last() {
            if *min < -tol.psd {
                return Err(Error::NotPsd(*min));
            }
        }
        Ok(DensityMatrix { m })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn eigenvalues(&self, tol: &Tolerances) -> Result<Vec<f64>> {
        Ok(hermitian_eigen(&self.m, tol)?.0)
    }
}

/// Probability vector (p1, p2, p3, p4) over the Bell basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonal {
    p: [f64; 4],
}

impl BellDiagonal {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        for (i, &x) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) || !x.is_finite() {
                return Err(Error::InvalidProbabilities(format!(
                    "p{} = {} out of [0,1]",
                    i + 1,
                    x
                )));
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(format!(
                "sum {} is not 1",
                sum
            )));
        }
        Ok(BellDiagonal { p })
    }

    pub fn p(&self) -> [f64; 4] {
        self.p
    }

    pub fn max_p(&self) -> f64 {
        self.p.iter().cloned().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..4 {
            if self.p[i] > self.p[best] {
                best = i;
            }
        }
        best
    }
}

/// Normalized pure two-qubit state.
#[derive(Debug, Clone)]
pub struct PureState {
    v: ComplexVector,
}

impl PureState {
    pub fn new(v: ComplexVector) -> Result<Self> {
        if v.dim() != 4 {
            return Err(Error::DimMismatch {
                expected: 4,
                got: v.dim(),
            });
        }
        if (v.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("norm {} is not 1", v.norm())));
        }
        Ok(PureState { v })
    }

    pub fn from_unnormalized(v: &ComplexVector) -> Result<Self> {
        let n = v.norm();
        if n < 1e-14 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        PureState::new(v.normalized())
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.v
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.v.outer(&self.v)
    }
}

/// The four Bell states psi_1..psi_4 in computational-basis components,
/// with the 1/sqrt(2) normalization applied.
pub fn bell_basis() -> [PureState; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mk = |xs: [f64; 4]| PureState::new(ComplexVector::from_reals(&xs)).unwrap();
    [
        mk([s, 0.0, 0.0, s]),   // (uu + dd)/sqrt2
        mk([s, 0.0, 0.0, -s]),  // (uu - dd)/sqrt2
        mk([0.0, s, s, 0.0]),   // (ud + du)/sqrt2
        mk([0.0, s, -s, 0.0]),  // (ud - du)/sqrt2
    ]
}

/// rho = sum_i p_i |psi_i><psi_i|.
pub fn bd_to_density(bd: &BellDiagonal, tol: &Tolerances) -> DensityMatrix {
    let basis = bell_basis();
    let mut m = ComplexMatrix::zeros(4);
    for (p, psi) in bd.p().iter().zip(&basis) {
        m = m.add(&psi.projector().scale(C64::new(*p, 0.0)));
    }
    DensityMatrix::new(m, tol).expect("Bell mixture is a valid density matrix")
}

/// Bell-basis diagonal of a density matrix, with a flag telling whether the
/// input is genuinely Bell-diagonal (all off-diagonal Bell entries < 1e-10).
pub fn density_to_bd(rho: &DensityMatrix) -> ([f64; 4], bool) {
    let basis = bell_basis();
    let mut p = [0.0; 4];
    let mut exact = true;
    for i in 0..4 {
        for j in 0..4 {
            let e = rho
                .matrix()
                .sandwich(basis[i].vector(), basis[j].vector());
            if i == j {
                p[i] = e.re;
            } else if e.norm() >= 1e-10 {
                exact = false;
            }
        }
    }
    (p, exact)
}

/// Spin flip: (sigma_y x sigma_y) rho* (sigma_y x sigma_y), conjugation in
/// the computational basis.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    let yy = sigma_yy();
    yy.mul(&rho.conj()).mul(&yy)
}

/// Spin flip of a vector: (sigma_y x sigma_y) conj(v).
pub fn spin_flip_vec(v: &ComplexVector) -> ComplexVector {
    sigma_yy().mul_vec(&v.conj())
}

/// Sampling region for random Bell-diagonal states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Uniform over the whole probability simplex.
    Any,
    /// Rejection-sampled until p1 > 1/2.
    Entangled,
}

/// Uniform Dirichlet(1,1,1,1) sample of the Bell simplex, deterministic
/// under the caller's generator.
pub fn random_bd<R: Rng>(rng: &mut R, region: Region) -> BellDiagonal {
    let dir = Dirichlet::new(&[1.0f64; 4]).unwrap();
    loop {
        let s = dir.sample(rng);
        let p = [s[0], s[1], s[2], s[3]];
        if region == Region::Entangled && p[0] <= 0.5 {
            continue;
        }
        if let Ok(bd) = BellDiagonal::new(p) {
            return bd;
        }
    }
}

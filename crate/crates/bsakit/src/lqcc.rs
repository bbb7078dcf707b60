//! Local quantum operations assisted by classical communication in the
//! single-outcome filtering form A x B = (U_A f_A) x (U_B f_B): applying maps
//! to states, the multiplicative concurrence transformation law, transporting
//! optimal decompositions, and verifying transported optimality.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::Serialize;

use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::lsd::{certificate_core, EnsembleTerm, LsDecomposition, OptimalityCertificate, RankBranch};
use crate::matrix::{kron, ComplexMatrix, Tolerances};
use crate::qstate::{
    density_to_bd, pauli_x, pauli_y, pauli_z, BellDiagonal, DensityMatrix, PureState,
};

/// One-sided filtration f = mu (1 + a m.sigma) with m a unit vector.
#[derive(Debug, Clone, Serialize)]
pub struct Filtration {
    pub mu: f64,
    pub a: f64,
    pub m: [f64; 3],
}

impl Filtration {
    pub fn new(mu: f64, a: f64, m: [f64; 3]) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidState(format!("filtration mu = {mu} must be positive")));
        }
        if !a.is_finite() {
            return Err(Error::InvalidState("filtration a must be finite".into()));
        }
        let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "filtration axis norm {norm} is not 1"
            )));
        }
        Ok(Filtration { mu, a, m })
    }

    /// Identity filtration (mu = 1, a = 0).
    pub fn identity() -> Self {
        Filtration {
            mu: 1.0,
            a: 0.0,
            m: [0.0, 0.0, 1.0],
        }
    }

    /// The 2x2 matrix mu (1 + a m.sigma).
    pub fn matrix(&self) -> ComplexMatrix {
        let mut f = ComplexMatrix::identity(2);
        let sig = [pauli_x(), pauli_y(), pauli_z()];
        for (mi, s) in self.m.iter().zip(&sig) {
            f = f.add(&s.scale(C64::new(self.a * mi, 0.0)));
        }
        f.scale(C64::new(self.mu, 0.0))
    }

    /// det f = mu^2 (1 - a^2).
    pub fn det(&self) -> f64 {
        self.mu * self.mu * (1.0 - self.a * self.a)
    }
}

fn check_unitary(u: &ComplexMatrix, side: &str) -> Result<()> {
    if u.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            got: u.dim(),
        });
    }
    let defect = u.dagger().mul(u).max_abs_diff(&ComplexMatrix::identity(2));
    if defect > 1e-10 {
        return Err(Error::InvalidState(format!(
            "{side} is not unitary: defect {defect:e}"
        )));
    }
    Ok(())
}

/// A single-outcome LQCC map A x B with A = U_A f_A and B = U_B f_B.
#[derive(Debug, Clone)]
pub struct LqccMap {
    pub u_a: ComplexMatrix,
    pub u_b: ComplexMatrix,
    pub f_a: Filtration,
    pub f_b: Filtration,
}

impl LqccMap {
    pub fn new(
        u_a: ComplexMatrix,
        u_b: ComplexMatrix,
        f_a: Filtration,
        f_b: Filtration,
    ) -> Result<Self> {
        check_unitary(&u_a, "U_A")?;
        check_unitary(&u_b, "U_B")?;
        Ok(LqccMap { u_a, u_b, f_a, f_b })
    }

    pub fn identity() -> Self {
        LqccMap {
            u_a: ComplexMatrix::identity(2),
            u_b: ComplexMatrix::identity(2),
            f_a: Filtration::identity(),
            f_b: Filtration::identity(),
        }
    }

    /// The one-sided operator A = U_A f_A.
    pub fn side_a(&self) -> ComplexMatrix {
        self.u_a.mul(&self.f_a.matrix())
    }

    /// The one-sided operator B = U_B f_B.
    pub fn side_b(&self) -> ComplexMatrix {
        self.u_b.mul(&self.f_b.matrix())
    }

    /// The full Kraus operator A x B.
    pub fn operator(&self) -> ComplexMatrix {
        kron(&self.side_a(), &self.side_b())
    }

    /// Whether the two sides are the same operator (within 1e-10).
    pub fn is_symmetric(&self) -> bool {
        self.side_a().max_abs_diff(&self.side_b()) < 1e-10
    }

    /// Closed-form inverse map: (U f)^-1 = U^dagger f' with
    /// f' = U f^-1 U^dagger, i.e. mu' = 1/(mu (1 - a^2)), a' = -a, and the
    /// axis rotated by the SO(3) image of U.
    pub fn inverse(&self, tol: &Tolerances) -> Result<LqccMap> {
        let inv_side = |u: &ComplexMatrix, f: &Filtration| -> Result<(ComplexMatrix, Filtration)> {
            if f.a.abs() >= 1.0 - tol.rank {
                return Err(Error::NotInvertible(f.a.abs()));
            }
            let mu = 1.0 / (f.mu * (1.0 - f.a * f.a));
            let m = rotate_axis(u, &f.m);
            Ok((u.dagger(), Filtration::new(mu, -f.a, m)?))
        };
        let (ua, fa) = inv_side(&self.u_a, &self.f_a)?;
        let (ub, fb) = inv_side(&self.u_b, &self.f_b)?;
        LqccMap::new(ua, ub, fa, fb)
    }
}

/// SO(3) rotation induced by a 2x2 unitary: (R m).sigma = U (m.sigma) U^dagger.
fn rotate_axis(u: &ComplexMatrix, m: &[f64; 3]) -> [f64; 3] {
    let sig = [pauli_x(), pauli_y(), pauli_z()];
    let mut conj = ComplexMatrix::zeros(2);
    for (mi, s) in m.iter().zip(&sig) {
        conj = conj.add(&s.scale(C64::new(*mi, 0.0)));
    }
    let conj = u.mul(&conj).mul(&u.dagger());
    let mut out = [0.0; 3];
    for (slot, s) in out.iter_mut().zip(&sig) {
        // m_i = tr(sigma_i X)/2 for X in the traceless Hermitian span.
        *slot = 0.5 * s.mul(&conj).trace().re;
    }
    out
}

/// rho' = (A x B) rho (A x B)^dagger / N with N the filtering probability
/// weight. Fails with [`Error::Annihilated`] when N vanishes.
pub fn apply_lqcc(
    map: &LqccMap,
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<(DensityMatrix, f64)> {
    let k = map.operator();
    let num = k.mul(rho.matrix()).mul(&k.dagger()).hermitian_part();
    let n = num.trace().re;
    if n <= tol.rank {
        return Err(Error::Annihilated(n));
    }
    let out = DensityMatrix::new(num.scale(C64::new(1.0 / n, 0.0)), tol)?;
    Ok((out, n))
}

/// Both sides of the multiplicative transformation law
/// C(rho') = mu^2 nu^2 (1 - a^2)(1 - b^2) C(rho) / N.
#[derive(Debug, Clone, Serialize)]
pub struct ConcurrenceLawCheck {
    pub predicted: f64,
    pub actual: f64,
    pub residual: f64,
    pub norm: f64,
}

pub fn concurrence_transform_check(
    map: &LqccMap,
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<ConcurrenceLawCheck> {
    let (out, n) = apply_lqcc(map, rho, tol)?;
    let c_in = concurrence(rho, tol)?.concurrence;
    let predicted = map.f_a.det() * map.f_b.det() * c_in / n;
    let actual = concurrence(&out, tol)?.concurrence;
    Ok(ConcurrenceLawCheck {
        predicted,
        actual,
        residual: (predicted - actual).abs(),
        norm: n,
    })
}

/// Push an optimal decomposition through an invertible LQCC map: each piece
/// is filtered and renormalized, and the weights pick up the per-state
/// filtering probabilities.
pub fn transport_decomposition(
    map: &LqccMap,
    d: &LsDecomposition,
    tol: &Tolerances,
) -> Result<LsDecomposition> {
    for f in [&map.f_a, &map.f_b] {
        if f.a.abs() >= 1.0 - tol.rank {
            return Err(Error::NotInvertible(f.a.abs()));
        }
    }
    let psi = d
        .psi
        .as_ref()
        .ok_or_else(|| Error::InvalidState("decomposition has no pure part".into()))?;
    let k = map.operator();
    let ktk = k.dagger().mul(&k);

    let rho = d.reconstruct();
    let n_rho = k.mul(&rho).mul(&k.dagger()).trace().re;
    if n_rho <= tol.rank {
        return Err(Error::Annihilated(n_rho));
    }
    let sep_num = k
        .mul(d.separable.matrix())
        .mul(&k.dagger())
        .hermitian_part();
    let n_sep = sep_num.trace().re;
    if n_sep <= tol.rank {
        return Err(Error::Annihilated(n_sep));
    }
    let lambda = d.lambda * n_sep / n_rho;

    let separable = DensityMatrix::new(sep_num.scale(C64::new(1.0 / n_sep, 0.0)), tol)?;
    let (p, exact) = density_to_bd(&separable);
    let separable_bd = if exact { BellDiagonal::new(p).ok() } else { None };

    let mut ensemble = Vec::with_capacity(d.ensemble.len());
    for t in &d.ensemble {
        let zv = t.state.vector();
        let gain = ktk.sandwich(zv, zv).re;
        if gain <= tol.rank {
            return Err(Error::Annihilated(gain));
        }
        ensemble.push(EnsembleTerm {
            weight: t.weight * gain / n_sep,
            state: PureState::from_unnormalized(&k.mul_vec(zv))?,
        });
    }

    let psi_out = PureState::from_unnormalized(&k.mul_vec(psi.vector()))?;
    Ok(LsDecomposition {
        lambda,
        separable,
        separable_bd,
        ensemble,
        psi: Some(psi_out),
    })
}

/// Outcome of verifying a transported decomposition.
///
/// On the full-rank branch every restricted-inverse relation transforms
/// covariantly, so the residuals are a genuine optimality certificate. On
/// the rank-deficient branches the degenerate-pair relations are
/// frame-sensitive: their residuals are evaluated and reported, but
/// optimality is asserted only for symmetric maps (both local operators
/// equal), where it rests on the restricted result for A = B rather than on
/// vanishing residuals. For asymmetric maps no optimality claim is made and
/// `pass` is false with `asserted` false.
#[derive(Debug, Clone, Serialize)]
pub struct TransportedCertificate {
    pub certificate: OptimalityCertificate,
    pub symmetric_map: bool,
    /// Whether an optimality claim is being made at all.
    pub asserted: bool,
    pub pass: bool,
}

pub fn verify_transported_optimality(
    map: &LqccMap,
    transported: &LsDecomposition,
    tol: &Tolerances,
) -> Result<TransportedCertificate> {
    let certificate = certificate_core(transported, tol, false)?;
    let symmetric_map = map.is_symmetric();
    let (asserted, pass) = if certificate.branch == RankBranch::FullRank {
        (true, certificate.pass)
    } else if symmetric_map {
        // Optimality under symmetric maps is the restricted claim; the checks
        // on independent spans must still hold, the degenerate-pair
        // residuals are reported as diagnostics only.
        (true, certificate.independent_checks_pass())
    } else {
        (false, false)
    };
    Ok(TransportedCertificate {
        certificate,
        symmetric_map,
        asserted,
        pass,
    })
}

/// Random unitary from an axis-angle parametrization:
/// U = cos(theta) 1 + i sin(theta) n.sigma with n uniform on the sphere.
pub fn random_unitary2<R: Rng>(rng: &mut R) -> ComplexMatrix {
    let n: [f64; 3] = UnitSphere.sample(rng);
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let sig = [pauli_x(), pauli_y(), pauli_z()];
    let mut u = ComplexMatrix::identity(2).scale(C64::new(theta.cos(), 0.0));
    for (ni, s) in n.iter().zip(&sig) {
        u = u.add(&s.scale(C64::new(0.0, theta.sin() * ni)));
    }
    u
}

/// Random invertible LQCC map with filtering strengths |a| <= max_a.
/// With `symmetric`, both sides share the same unitary and filtration.
pub fn random_lqcc<R: Rng>(rng: &mut R, symmetric: bool, max_a: f64) -> LqccMap {
    let side = |rng: &mut R| {
        let u = random_unitary2(rng);
        let m: [f64; 3] = UnitSphere.sample(rng);
        let a = rng.gen_range(-max_a..max_a);
        let mu = rng.gen_range(0.2..1.0);
        (u, Filtration::new(mu, a, m).unwrap())
    };
    let (u_a, f_a) = side(rng);
    let (u_b, f_b) = if symmetric {
        (u_a.clone(), f_a.clone())
    } else {
        side(rng)
    };
    LqccMap::new(u_a, u_b, f_a, f_b).unwrap()
}

//! Dense complex linear algebra at sizes 2 and 4: arithmetic, Hermitian
//! eigendecomposition by cyclic Jacobi rotations, principal PSD square root,
//! Kronecker product, partial transpose, dual bases and restricted inverses
//! on a span.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances on normalized inputs. All overridable; the defaults
/// are what every constructor and check uses unless told otherwise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity check, max-entry deviation from the adjoint.
    pub herm: f64,
    /// Positive semidefiniteness: eigenvalues >= -psd, clamped to 0.
    pub psd: f64,
    /// Eigen/reconstruction residuals.
    pub eig: f64,
    /// Rank / linear-independence thresholds (Gram determinants, traces).
    pub rank: f64,
    /// Optimality certificate residuals (looser: residuals compound through
    /// dual-basis construction).
    pub cert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-9,
            psd: 1e-9,
            eig: 1e-10,
            rank: 1e-10,
            cert: 1e-8,
        }
    }
}

impl Tolerances {
    /// Uniformly scale every tolerance (CLI exposes this via an env var).
    pub fn scaled(self, factor: f64) -> Self {
        Tolerances {
            herm: self.herm * factor,
            psd: self.psd * factor,
            eig: self.eig * factor,
            rank: self.rank * factor,
            cert: self.cert * factor,
        }
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "rows must form a square matrix");
            data.extend_from_slice(r);
        }
        ComplexMatrix { dim, data }
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.dim());
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                out[i] += self[(i, j)] * v[j];
            }
        }
        ComplexVector { data: out }
    }

    /// Max-magnitude entry of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity, max-entry norm of m - m^dagger.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// (m + m^dagger)/2, killing floating-point dust on nearly Hermitian input.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.dagger()).scale(C64::new(0.5, 0.0))
    }

    /// <u| m |v> with the bra conjugated.
    pub fn sandwich(&self, u: &ComplexVector, v: &ComplexVector) -> C64 {
        u.dot(&self.mul_vec(v))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl ComplexVector {
    pub fn new(data: Vec<C64>) -> Self {
        ComplexVector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexVector {
            data: vec![C64::new(0.0, 0.0); dim],
        }
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        ComplexVector {
            data: xs.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    /// <self|other>, conjugating self.
    pub fn dot(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scale(C64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexVector {
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        ComplexVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        ComplexVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexVector {
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// |self><other| as a matrix.
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.data[i] * other.data[j].conj();
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

const JACOBI_SWEEP_CAP: usize = 100;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted descending with orthonormal eigenvectors in the
/// same order. Ties keep first-encountered order; callers must not rely on it.
pub fn hermitian_eigen(
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<ComplexVector>)> {
    let defect = m.hermiticity_defect();
    if defect > tol.herm {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.max_abs().max(1.0);
    let target = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..JACOBI_SWEEP_CAP {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= target * 1e-2 {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (app - aqq) / (2.0 * r);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = C64::new(c, 0.0);
                let s_phase = phase * s; // s e^{i phi}
                let s_phase_conj = s_phase.conj(); // s e^{-i phi}

                // A <- A J, columns p and q.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = cs * aip + s_phase_conj * aiq;
                    a[(i, q)] = -s_phase * aip + cs * aiq;
                }
                // A <- J^dagger A, rows p and q.
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = cs * api + s_phase * aqi;
                    a[(q, i)] = -s_phase_conj * api + cs * aqi;
                }
                // V <- V J.
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = cs * vip + s_phase_conj * viq;
                    v[(i, q)] = -s_phase * vip + cs * viq;
                }
                // Pivot is annihilated up to roundoff.
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
    if !converged {
        // Final check after the last sweep.
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off > target {
            return Err(Error::NoConvergence);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .re
            .partial_cmp(&a[(i, i)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors: Vec<ComplexVector> = order
        .iter()
        .map(|&k| ComplexVector::new((0..n).map(|i| v[(i, k)]).collect()))
        .collect();
    Ok((eigenvalues, eigenvectors))
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in (-psd, 0) are clamped to 0 before the square root;
/// anything below -psd is an error.
pub fn matrix_sqrt_psd(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eigen(m, tol)?;
    let mut out = ComplexMatrix::zeros(m.dim());
    for (lam, vec) in vals.iter().zip(&vecs) {
        if *lam < -tol.psd {
            return Err(Error::NotPsd(*lam));
        }
        let clamped = lam.max(0.0);
        out = out.add(&vec.outer(vec).scale(C64::new(clamped.sqrt(), 0.0)));
    }
    Ok(out)
}

/// Kronecker product of two 2x2 matrices in the {uu, ud, du, dd} basis order.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.dim(), 2, "kron expects 2x2 factors");
    assert_eq!(b.dim(), 2, "kron expects 2x2 factors");
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two 2-vectors.
pub fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    assert_eq!(a.dim(), 2);
    assert_eq!(b.dim(), 2);
    ComplexVector::new(vec![
        a[0] * b[0],
        a[0] * b[1],
        a[1] * b[0],
        a[1] * b[1],
    ])
}

/// Transpose on the second tensor factor of a 4x4 matrix.
pub fn partial_transpose(m: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(m.dim(), 4);
    let mut out = ComplexMatrix::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    // (a,c),(b,d) <- (a,d),(b,c)
                    out[(2 * a + c, 2 * b + d)] = m[(2 * a + d, 2 * b + c)];
                }
            }
        }
    }
    out
}

/// Gauss-Jordan inverse of a small complex matrix given as nested rows.
/// Returns the inverse and the determinant.
pub(crate) fn small_inverse(rows: &[Vec<C64>]) -> (Vec<Vec<C64>>, C64) {
    let n = rows.len();
    let mut a: Vec<Vec<C64>> = rows.to_vec();
    let mut inv: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        // Partial pivoting.
        let mut pivot = col;
        for r in (col + 1)..n {
            if a[r][col].norm() > a[pivot][col].norm() {
                pivot = r;
            }
        }
        if pivot != col {
            a.swap(col, pivot);
            inv.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        if p.norm() == 0.0 {
            return (inv, C64::new(0.0, 0.0));
        }
        let pinv = C64::new(1.0, 0.0) / p;
        for j in 0..n {
            a[col][j] *= pinv;
            inv[col][j] *= pinv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            if factor.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let acj = a[col][j];
                let icj = inv[col][j];
                a[r][j] -= factor * acj;
                inv[r][j] -= factor * icj;
            }
        }
    }
    (inv, det)
}

/// Gram matrix g_ij = <v_i|v_j>.
pub fn gram(vs: &[ComplexVector]) -> Vec<Vec<C64>> {
    vs.iter()
        .map(|u| vs.iter().map(|w| u.dot(w)).collect())
        .collect()
}

/// Determinant of the Gram matrix of the given vectors.
pub fn gram_det(vs: &[ComplexVector]) -> C64 {
    let (_, det) = small_inverse(&gram(vs));
    det
}

/// Dual vectors of a linearly independent set: <dual_i|v_j> = delta_ij,
/// with each dual lying in the span of the inputs.
pub fn dual_basis(vs: &[ComplexVector], tol: &Tolerances) -> Result<Vec<ComplexVector>> {
    let g = gram(vs);
    let (ginv, det) = small_inverse(&g);
    if det.norm() < tol.rank {
        return Err(Error::DependentSet(det.norm()));
    }
    let k = vs.len();
    let dim = vs[0].dim();
    let mut duals = Vec::with_capacity(k);
    for i in 0..k {
        let mut d = ComplexVector::zeros(dim);
        for (j, vj) in vs.iter().enumerate() {
            // <dual_i|v_j> = sum_k conj(c_ik) g_kj = delta requires c_ik = conj(ginv_ik)
            d = d.add(&vj.scale(ginv[i][j].conj()));
        }
        duals.push(d);
    }
    Ok(duals)
}

/// Inverse of M = sum_i w_i |v_i><v_i| restricted to span{v_i}, expanded in
/// the dual basis as sum_i w_i^-1 |dual_i><dual_i|.
pub fn restricted_inverse(terms: &[(f64, ComplexVector)], tol: &Tolerances) -> Result<ComplexMatrix> {
    assert!(!terms.is_empty());
    assert!(terms.iter().all(|(w, _)| *w > 0.0), "weights must be positive");
    let vs: Vec<ComplexVector> = terms.iter().map(|(_, v)| v.clone()).collect();
    let duals = dual_basis(&vs, tol)?;
    let dim = vs[0].dim();
    let mut out = ComplexMatrix::zeros(dim);
    for ((w, _), d) in terms.iter().zip(&duals) {
        out = out.add(&d.outer(d).scale(C64::new(1.0 / w, 0.0)));
    }
    Ok(out)
}

/// Restricted inverse of an arbitrary operator on the span of a linearly
/// independent set: expand rho = sum a_ij |v_i><v_j|, invert the coefficient
/// matrix, and rebuild on the duals.
pub fn restricted_inverse_on_span(
    rho: &ComplexMatrix,
    span: &[ComplexVector],
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let duals = dual_basis(span, tol)?;
    let k = span.len();
    // a_ij = <dual_i| rho |dual_j>
    let a: Vec<Vec<C64>> = (0..k)
        .map(|i| (0..k).map(|j| rho.sandwich(&duals[i], &duals[j])).collect())
        .collect();
    let (b, det) = small_inverse(&a);
    if det.norm() < tol.rank {
        return Err(Error::DependentSet(det.norm()));
    }
    let dim = span[0].dim();
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..k {
        for j in 0..k {
            out = out.add(&duals[i].outer(&duals[j]).scale(b[i][j]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(seed: u64, dim: usize) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(rng.gen_range(-1.0..1.0), 0.0);
            for j in (i + 1)..dim {
                let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn reconstruct(vals: &[f64], vecs: &[ComplexVector]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(vecs[0].dim());
        for (l, v) in vals.iter().zip(vecs) {
            m = m.add(&v.outer(v).scale(c(*l, 0.0)));
        }
        m
    }

    #[test]
    fn eigen_identity() {
        let tol = Tolerances::default();
        let (vals, _) = hermitian_eigen(&ComplexMatrix::identity(4), &tol).unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_diagonal_sorted() {
        let tol = Tolerances::default();
        let m = ComplexMatrix::diag_real(&[3.0, 1.0, 4.0, 2.0]);
        let (vals, vecs) = hermitian_eigen(&m, &tol).unwrap();
        assert_eq!(vals, vec![4.0, 3.0, 2.0, 1.0]);
        // Eigenvectors are the permuted standard basis.
        let expect = [2usize, 0, 3, 1];
        for (v, &k) in vecs.iter().zip(&expect) {
            assert!((v[k].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_reconstruction_random() {
        let tol = Tolerances::default();
        for seed in 0..20 {
            let m = random_hermitian(seed, 4);
            let (vals, vecs) = hermitian_eigen(&m, &tol).unwrap();
            assert!(reconstruct(&vals, &vecs).max_abs_diff(&m) < 1e-10);
            // Orthonormality.
            for i in 0..4 {
                for j in 0..4 {
                    let d = vecs[i].dot(&vecs[j]);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((d - c(expect, 0.0)).norm() < 1e-10);
                }
            }
            // Descending order.
            for w in vals.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let tol = Tolerances::default();
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            hermitian_eigen(&m, &tol),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn sqrt_identity_and_diag() {
        let tol = Tolerances::default();
        let s = matrix_sqrt_psd(&ComplexMatrix::identity(4), &tol).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        let m = ComplexMatrix::diag_real(&[4.0, 9.0, 0.0, 1.0]);
        let s = matrix_sqrt_psd(&m, &tol).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::diag_real(&[2.0, 3.0, 0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn sqrt_random_psd_residual() {
        let tol = Tolerances::default();
        for seed in 0..10 {
            let x = random_hermitian(seed + 100, 4);
            let m = x.mul(&x); // PSD by construction
            let s = matrix_sqrt_psd(&m, &tol).unwrap();
            assert!(s.mul(&s).max_abs_diff(&m) < 1e-10);
            assert!(s.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn sqrt_rejects_negative() {
        let tol = Tolerances::default();
        let m = ComplexMatrix::diag_real(&[1.0, -0.5, 1.0, 1.0]);
        assert!(matches!(matrix_sqrt_psd(&m, &tol), Err(Error::NotPsd(_))));
    }

    #[test]
    fn kron_cases() {
        let i2 = ComplexMatrix::identity(2);
        assert!(kron(&i2, &i2).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let sy = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ]);
        let yy = kron(&sy, &sy);
        assert!(yy.mul(&yy).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let a = ComplexMatrix::diag_real(&[1.0, 2.0]);
        let b = ComplexMatrix::diag_real(&[3.0, 4.0]);
        assert!(kron(&a, &b).max_abs_diff(&ComplexMatrix::diag_real(&[3.0, 4.0, 6.0, 8.0])) < 1e-15);
    }

    #[test]
    fn partial_transpose_product_and_diag() {
        let a = random_hermitian(7, 2);
        let b = random_hermitian(8, 2);
        let pt = partial_transpose(&kron(&a, &b));
        assert!(pt.max_abs_diff(&kron(&a, &b.transpose())) < 1e-14);
        let d = ComplexMatrix::diag_real(&[0.1, 0.2, 0.3, 0.4]);
        assert!(partial_transpose(&d).max_abs_diff(&d) < 1e-15);
    }

    #[test]
    fn partial_transpose_involution_linear() {
        let m = random_hermitian(9, 4);
        let twice = partial_transpose(&partial_transpose(&m));
        assert!(twice.max_abs_diff(&m) < 1e-15);
        assert!((partial_transpose(&m).trace() - m.trace()).norm() < 1e-14);
        assert!(partial_transpose(&m).hermiticity_defect() < 1e-14);
    }

    #[test]
    fn dual_basis_orthonormal_fixed() {
        let tol = Tolerances::default();
        let vs = vec![
            ComplexVector::from_reals(&[1.0, 0.0]),
            ComplexVector::from_reals(&[0.0, 1.0]),
        ];
        let duals = dual_basis(&vs, &tol).unwrap();
        for (v, d) in vs.iter().zip(&duals) {
            assert!(v.max_abs_diff(d) < 1e-12);
        }
    }

    #[test]
    fn dual_basis_hand_example() {
        // (1,0),(1,1) -> duals (1,-1),(0,1): solved from the 2x2 Gram system.
        let tol = Tolerances::default();
        let vs = vec![
            ComplexVector::from_reals(&[1.0, 0.0]),
            ComplexVector::from_reals(&[1.0, 1.0]),
        ];
        let duals = dual_basis(&vs, &tol).unwrap();
        assert!(duals[0].max_abs_diff(&ComplexVector::from_reals(&[1.0, -1.0])) < 1e-12);
        assert!(duals[1].max_abs_diff(&ComplexVector::from_reals(&[0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn dual_basis_rejects_dependent() {
        let tol = Tolerances::default();
        let vs = vec![
            ComplexVector::from_reals(&[1.0, 1.0]),
            ComplexVector::from_reals(&[2.0, 2.0]),
        ];
        assert!(matches!(dual_basis(&vs, &tol), Err(Error::DependentSet(_))));
    }

    #[test]
    fn dual_completeness_on_span() {
        use rand::{Rng, SeedableRng};
        let tol = Tolerances::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let vs: Vec<ComplexVector> = (0..3)
            .map(|_| {
                ComplexVector::new(
                    (0..4)
                        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect(),
                )
            })
            .collect();
        let duals = dual_basis(&vs, &tol).unwrap();
        // <dual_i|v_j> = delta
        for i in 0..3 {
            for j in 0..3 {
                let d = duals[i].dot(&vs[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - c(expect, 0.0)).norm() < 1e-10);
            }
        }
        // Completeness restricted to the span: sum |dual_i><v_i| acts as
        // identity on every v in the span.
        let mut proj = ComplexMatrix::zeros(4);
        for (d, v) in duals.iter().zip(&vs) {
            proj = proj.add(&d.outer(v));
        }
        for v in &vs {
            assert!(proj.mul_vec(v).max_abs_diff(v) < 1e-10);
        }
    }

    #[test]
    fn restricted_inverse_single_term() {
        let tol = Tolerances::default();
        let e1 = ComplexVector::basis(4, 0);
        let inv = restricted_inverse(&[(2.0, e1.clone())], &tol).unwrap();
        assert!(inv.max_abs_diff(&e1.outer(&e1).scale(c(0.5, 0.0))) < 1e-12);
    }

    #[test]
    fn restricted_inverse_orthonormal_full() {
        let tol = Tolerances::default();
        let terms: Vec<(f64, ComplexVector)> = (0..4)
            .map(|k| ((k + 1) as f64, ComplexVector::basis(4, k)))
            .collect();
        let inv = restricted_inverse(&terms, &tol).unwrap();
        let expect = ComplexMatrix::diag_real(&[1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert!(inv.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn restricted_inverse_identity_on_span() {
        use rand::{Rng, SeedableRng};
        let tol = Tolerances::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let terms: Vec<(f64, ComplexVector)> = (0..3)
            .map(|_| {
                (
                    rng.gen_range(0.1..2.0),
                    ComplexVector::new(
                        (0..4)
                            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                            .collect(),
                    ),
                )
            })
            .collect();
        let mut m = ComplexMatrix::zeros(4);
        for (w, v) in &terms {
            m = m.add(&v.outer(v).scale(c(*w, 0.0)));
        }
        let inv = restricted_inverse(&terms, &tol).unwrap();
        let prod = m.mul(&inv);
        for (_, v) in &terms {
            assert!(prod.mul_vec(v).max_abs_diff(v) < 1e-9);
        }
    }
}

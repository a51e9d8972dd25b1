//! Dual and polar decomposition of automorphisms of a matrix *-algebra.
//!
//! For an automorphism `rho` the dual is `rho' = (rho^*)^-1` with
//! `rho^*(x) = rho(x^*)^*`. The polar parts are `gamma = sqrt(rho' rho)`
//! (principal branch) and `pi = rho gamma^-1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::Schur;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intrinsic::{multiplicativity_residual, op_residual, IntrinsicData, TwoPointAlloy};
use crate::matalg::{bound, opnorm, singular_values, Mat, MatrixStarAlgebra, C64};

/// Condition number above which the Schur route is cross-checked by Newton iteration.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Principal square root of a matrix whose eigenvalues lie in the open right half-plane.
///
/// The Schur route is tried first; a Denman-Beavers iteration is the fallback.
pub fn principal_sqrt(m: &Mat, tol: f64) -> Result<Mat> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if n == 0 {
        return Ok(m.clone());
    }
    let limit = bound(tol, opnorm(m));
    let schur = Schur::try_new(m.clone(), 1e-15, 10_000);
    let mut best_res = f64::INFINITY;
    if let Some(s) = schur {
        let (q, t) = s.unpack();
        let min_re = t.diagonal().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if min_re <= 0.0 {
            return Err(Error::SpectrumOnCut(min_re));
        }
        let mut u = Mat::zeros(n, n);
        for j in 0..n {
            u[(j, j)] = t[(j, j)].sqrt();
            for i in (0..j).rev() {
                let mut s = t[(i, j)];
                for k in i + 1..j {
                    s -= u[(i, k)] * u[(k, j)];
                }
                u[(i, j)] = s / (u[(i, i)] + u[(j, j)]);
            }
        }
        let root = &q * u * q.adjoint();
        best_res = (&root * &root - m).norm();
        if best_res <= limit {
            return Ok(root);
        }
    }
    let mut y = m.clone();
    let mut z = Mat::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or(Error::DefectiveOperator(best_res))?;
        let zi = z.clone().try_inverse().ok_or(Error::DefectiveOperator(best_res))?;
        let ny = (&y + zi).unscale(2.0);
        let nz = (&z + yi).unscale(2.0);
        let delta = (&ny - &y).norm();
        y = ny;
        z = nz;
        if delta <= 1e-15 * y.norm() {
            break;
        }
    }
    let res = (&y * &y - m).norm();
    if res <= limit {
        Ok(y)
    } else {
        Err(Error::DefectiveOperator(res.min(best_res)))
    }
}

/// Eigenvalues through a Schur form with a bounded number of sweeps, loosening the threshold once.
pub fn eigenvalues(m: &Mat) -> Option<nalgebra::DVector<C64>> {
    [1e-15, 1e-12]
        .iter()
        .find_map(|&eps| Schur::try_new(m.clone(), eps, 10_000))
        .map(|s| s.unpack().1.diagonal())
}

/// Invertible multiplicative operator on the coordinates of `alg`.
#[derive(Clone, Debug)]
pub struct AlgebraAutomorphism {
    alg: Arc<MatrixStarAlgebra>,
    op: Mat,
}

impl AlgebraAutomorphism {
    pub fn new(alg: Arc<MatrixStarAlgebra>, op: Mat) -> Result<Self> {
        let rho = Self::new_unchecked(alg, op)?;
        let tol = rho.alg.tol();
        let sv = singular_values(&rho.op);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smin > tol * smax) {
            return Err(Error::NotInvertible(smin));
        }
        let mult = multiplicativity_residual(&rho.alg, &rho.op);
        if mult > bound(tol, smax * smax) {
            return Err(Error::MultiplicativityViolation(mult));
        }
        Ok(rho)
    }

    pub fn new_unchecked(alg: Arc<MatrixStarAlgebra>, op: Mat) -> Result<Self> {
        let d = alg.dim();
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
        }
        Ok(AlgebraAutomorphism { alg, op })
    }

    pub fn identity(alg: Arc<MatrixStarAlgebra>) -> Self {
        let d = alg.dim();
        AlgebraAutomorphism { alg, op: Mat::identity(d, d) }
    }

    /// `a -> s a s^-1` for an invertible `s` normalizing the algebra.
    pub fn conjugation(alg: Arc<MatrixStarAlgebra>, s: &Mat) -> Result<Self> {
        let sinv = s.clone().try_inverse().ok_or(Error::NotInvertible(0.0))?;
        let d = alg.dim();
        let mut op = Mat::zeros(d, d);
        for (k, b) in alg.basis().iter().enumerate() {
            op.set_column(k, &alg.try_coords(&(s * b * &sinv))?);
        }
        Self::new(alg, op)
    }

    pub fn alg(&self) -> &Arc<MatrixStarAlgebra> {
        &self.alg
    }

    pub fn op(&self) -> &Mat {
        &self.op
    }

    pub fn apply(&self, x: &Mat) -> Result<Mat> {
        Ok(self.alg.element(&(&self.op * self.alg.try_coords(x)?)))
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &AlgebraAutomorphism) -> AlgebraAutomorphism {
        AlgebraAutomorphism { alg: self.alg.clone(), op: &self.op * &other.op }
    }

    pub fn inverse(&self) -> Result<AlgebraAutomorphism> {
        let inv = self.op.clone().try_inverse().ok_or(Error::NotInvertible(0.0))?;
        Ok(AlgebraAutomorphism { alg: self.alg.clone(), op: inv })
    }

    /// `x -> rho(x^*)^*`.
    pub fn star_conjugate(&self) -> AlgebraAutomorphism {
        AlgebraAutomorphism { alg: self.alg.clone(), op: self.alg.star_conjugate_map(&self.op) }
    }

    /// `(rho^*)^-1`.
    pub fn dual(&self) -> Result<AlgebraAutomorphism> {
        self.star_conjugate().inverse()
    }

    /// `|rho^* - rho|` over basis elements; zero exactly for *-preserving maps.
    pub fn star_residual(&self) -> f64 {
        op_residual(&self.alg, &(self.alg.star_conjugate_map(&self.op) - &self.op))
    }

    /// `|rho' - rho|` over basis elements.
    pub fn self_dual_residual(&self) -> Result<f64> {
        Ok(op_residual(&self.alg, &(self.dual()?.op - &self.op)))
    }

    pub fn distance(&self, other: &AlgebraAutomorphism) -> f64 {
        op_residual(&self.alg, &(&self.op - &other.op))
    }

    pub fn polar_decompose(&self) -> Result<PolarDecomposition> {
        polar_decompose(self)
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PolarResiduals {
    pub sqrt: f64,
    pub reproduce: f64,
    pub pi_star: f64,
    pub gamma_self_dual: f64,
    pub gamma_spectrum_imag: f64,
    pub gamma_spectrum_min: f64,
}

#[derive(Clone, Debug)]
pub struct PolarDecomposition {
    pub pi_part: AlgebraAutomorphism,
    pub gamma_part: AlgebraAutomorphism,
    pub residuals: PolarResiduals,
}

/// `rho = pi gamma` with `pi` a *-automorphism and `gamma` positive.
pub fn polar_decompose(rho: &AlgebraAutomorphism) -> Result<PolarDecomposition> {
    let alg = rho.alg.clone();
    let tol = alg.tol();
    let d = alg.dim();
    let dual = rho.dual()?;
    let m = &dual.op * &rho.op;
    let gamma = principal_sqrt(&m, tol)?;
    let gamma_inv = gamma.clone().try_inverse().ok_or(Error::NotInvertible(0.0))?;
    let pi = &rho.op * &gamma_inv;
    let scale = opnorm(&rho.op) * opnorm(&gamma_inv);
    let mut r = PolarResiduals {
        sqrt: (&gamma * &gamma - &m).norm(),
        reproduce: op_residual(&alg, &(&pi * &gamma - &rho.op)),
        ..Default::default()
    };
    let pi_aut = AlgebraAutomorphism { alg: alg.clone(), op: pi };
    let gamma_aut = AlgebraAutomorphism { alg: alg.clone(), op: gamma };
    r.pi_star = pi_aut.star_residual();
    r.gamma_self_dual = gamma_aut.self_dual_residual()?;
    let eig = eigenvalues(&gamma_aut.op).unwrap_or_else(|| nalgebra::DVector::from_element(d, C64::new(f64::NAN, 0.0)));
    r.gamma_spectrum_imag = eig.iter().map(|z| z.im.abs() / (1.0 + z.norm())).fold(0.0, f64::max);
    r.gamma_spectrum_min = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if r.pi_star > bound(tol, scale) {
        return Err(Error::NotStarAutomorphism(r.pi_star));
    }
    let gscale = opnorm(&gamma_aut.op) * opnorm(&gamma_inv);
    if r.gamma_self_dual > bound(tol, gscale) || r.gamma_spectrum_imag > tol.sqrt() || !(r.gamma_spectrum_min > 0.0) {
        return Err(Error::NotPositiveAutomorphism(r.gamma_self_dual.max(r.gamma_spectrum_imag)));
    }
    Ok(PolarDecomposition { pi_part: pi_aut, gamma_part: gamma_aut, residuals: r })
}

/// Residuals of the polar decomposition `Phi = Pi Gamma` on `X`.
#[derive(Clone, Debug)]
pub struct PhiPolarReport {
    pub big_pi: Mat,
    pub big_gamma: Mat,
    /// Restrictions of `Pi` and `Gamma` to `A`, in A-coordinates.
    pub pi_a: Mat,
    pub gamma_a: Mat,
    pub residuals: BTreeMap<String, f64>,
}

impl PhiPolarReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }

    /// Names and residuals of checks above `limit`.
    pub fn failures(&self, limit: f64) -> Vec<(String, f64)> {
        self.residuals
            .iter()
            .filter(|(_, &v)| !(v <= limit))
            .map(|(k, &v)| (k.clone(), v))
            .collect()
    }
}

pub fn phi_polar_report(t: &TwoPointAlloy, data: &IntrinsicData) -> Result<PhiPolarReport> {
    let x = t.x();
    let a = t.a();
    let dx = x.dim();
    let big_phi = AlgebraAutomorphism::new_unchecked(x.clone(), data.phi_x.clone())?;
    let polar = polar_decompose(&big_phi)?;
    let pi = polar.pi_part.op.clone();
    let gamma = polar.gamma_part.op.clone();
    let j = t.embed_coeff().clone();
    let jp = j.clone().pseudo_inverse(1e-12).map_err(|_| Error::NotInvertible(0.0))?;
    let outside = Mat::identity(dx, dx) - &j * &jp;
    let pc = x.project_coords(t.p());
    let qc = x.project_coords(t.q());
    let pi_a = &jp * &pi * &j;
    let gamma_a = &jp * &gamma * &j;
    let mut res = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        res.insert(k.to_string(), v);
    };
    put("phi_self_dual", big_phi.self_dual_residual()?);
    put("pi_involution", op_residual(x, &(&pi * &pi - Mat::identity(dx, dx))));
    put("pi_gamma_commute", op_residual(x, &(&pi * &gamma - &gamma * &pi)));
    put("gamma_fixes_p", x.coords_norm(&(&gamma * &pc - &pc)));
    put("gamma_fixes_q", x.coords_norm(&(&gamma * &qc - &qc)));
    put("pi_swaps_p", x.coords_norm(&(&pi * &pc - &qc)));
    put("pi_swaps_q", x.coords_norm(&(&pi * &qc - &pc)));
    put("gamma_preserves_a", op_residual(x, &(&outside * &gamma * &j)));
    put("pi_preserves_a", op_residual(x, &(&outside * &pi * &j)));
    put("phi_eq_pi_gamma_on_a", op_residual(a, &(&pi_a * &gamma_a - &data.phi)));
    put("polar_reproduces", polar.residuals.reproduce);
    put("polar_sqrt", polar.residuals.sqrt);
    let phi_a = AlgebraAutomorphism::new_unchecked(a.clone(), data.phi.clone())?;
    let small = polar_decompose(&phi_a)?;
    put("restriction_is_polar_pi", op_residual(a, &(&small.pi_part.op - &pi_a)));
    put("restriction_is_polar_gamma", op_residual(a, &(&small.gamma_part.op - &gamma_a)));
    Ok(PhiPolarReport { big_pi: pi, big_gamma: gamma, pi_a, gamma_a, residuals: res })
}

/// Full polar report for `Phi`, failing on the first residual above `tol (1 + |Phi|)`.
pub fn verify_phi_polar(t: &TwoPointAlloy, data: &IntrinsicData) -> Result<PhiPolarReport> {
    let rep = phi_polar_report(t, data)?;
    let limit = bound(t.tol(), opnorm(&data.phi_x).powi(2));
    if let Some((name, residual)) = rep.failures(limit).into_iter().next() {
        return Err(Error::CheckFailed { name, residual });
    }
    Ok(rep)
}

/// An automorphism given by `a -> s a s^-1` with `s` a positive element of `alg`.
pub fn positive_conjugation(alg: Arc<MatrixStarAlgebra>, s: &Mat) -> Result<AlgebraAutomorphism> {
    AlgebraAutomorphism::conjugation(alg, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::{real, DEFAULT_TOL};

    fn m2() -> Arc<MatrixStarAlgebra> {
        Arc::new(MatrixStarAlgebra::full_matrix(2, DEFAULT_TOL).unwrap())
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = Mat::identity(3, 3);
        assert!((principal_sqrt(&id, DEFAULT_TOL).unwrap() - &id).norm() < 1e-14);
        let d = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(4.0), real(9.0), real(0.25)]));
        let r = principal_sqrt(&d, DEFAULT_TOL).unwrap();
        let expected = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(2.0), real(3.0), real(0.5)]));
        assert!((r - expected).norm() < 1e-13);
        let neg = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(-1.0), real(1.0)]));
        assert!(matches!(principal_sqrt(&neg, DEFAULT_TOL), Err(Error::SpectrumOnCut(_))));
    }

    #[test]
    fn sqrt_of_jordan_block() {
        // non-diagonalizable, spectrum {4}
        let j = Mat::from_row_slice(2, 2, &[real(4.0), real(1.0), real(0.0), real(4.0)]);
        let r = principal_sqrt(&j, DEFAULT_TOL).unwrap();
        assert!((&r * &r - &j).norm() < 1e-13);
    }

    #[test]
    fn star_conjugate_of_conjugation() {
        let s = Mat::from_row_slice(2, 2, &[real(2.0), real(1.0), real(0.0), real(1.0)]);
        let rho = AlgebraAutomorphism::conjugation(m2(), &s).unwrap();
        let star = rho.star_conjugate();
        let s_adj_inv = s.adjoint().try_inverse().unwrap();
        let expected = AlgebraAutomorphism::conjugation(m2(), &s_adj_inv).unwrap();
        assert!(star.distance(&expected) < 1e-12);
        assert!(star.star_conjugate().distance(&rho) < 1e-12);
        let id = AlgebraAutomorphism::identity(m2());
        assert!(id.star_conjugate().distance(&id) < 1e-15);
    }

    #[test]
    fn polar_of_star_automorphism() {
        let u = Mat::from_row_slice(2, 2, &[real(0.6), real(-0.8), real(0.8), real(0.6)]);
        let rho = AlgebraAutomorphism::conjugation(m2(), &u).unwrap();
        let dual = rho.dual().unwrap();
        assert!(op_residual(rho.alg(), &(dual.op() * rho.op() - Mat::identity(4, 4))) < 1e-12);
        let pd = polar_decompose(&rho).unwrap();
        assert!(pd.gamma_part.distance(&AlgebraAutomorphism::identity(m2())) < 1e-10);
        assert!(pd.pi_part.distance(&rho) < 1e-10);
    }

    #[test]
    fn polar_of_positive_conjugation() {
        let s = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(2.0), real(1.0)]));
        let rho = AlgebraAutomorphism::conjugation(m2(), &s).unwrap();
        assert!(rho.self_dual_residual().unwrap() < 1e-12);
        let pd = polar_decompose(&rho).unwrap();
        assert!(pd.pi_part.distance(&AlgebraAutomorphism::identity(m2())) < 1e-10);
        assert!(pd.gamma_part.distance(&rho) < 1e-10);
    }
}

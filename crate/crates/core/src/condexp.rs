//! Conditional expectations `X -> A` of a two-point alloy, parametrized by `h = G(p)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intrinsic::{op_residual, IntrinsicData, TwoPointAlloy};
use crate::matalg::{
    bound, hermitian_residual, hermitian_spectrum, min_hermitian_eigenvalue, opnorm, singular_values,
    trace_conditional_expectation, Mat, MatrixStarAlgebra, Vect, C64,
};

fn triples(da: usize, dx: usize) -> Vec<(usize, usize, usize)> {
    if da * da * dx <= 8192 {
        let mut out = Vec::with_capacity(da * da * dx);
        for i in 0..da {
            for k in 0..dx {
                for j in 0..da {
                    out.push((i, k, j));
                }
            }
        }
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        (0..2048).map(|_| (rng.random_range(0..da), rng.random_range(0..dx), rng.random_range(0..da))).collect()
    }
}

/// X-coordinates used for positivity sampling: basis elements, then `x_k + x_l` and `x_k + i x_l`.
fn positivity_samples(dx: usize) -> Vec<Vect> {
    let unit = |k: usize| {
        let mut v = Vect::zeros(dx);
        v[k] = C64::new(1.0, 0.0);
        v
    };
    let mut out: Vec<Vect> = (0..dx).map(unit).collect();
    let limit = if dx <= 16 { dx } else { 8 };
    for k in 0..limit {
        for l in k + 1..limit {
            out.push(unit(k) + unit(l));
            out.push(unit(k) + unit(l) * C64::new(0.0, 1.0));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct ConditionalExpectation {
    alloy: TwoPointAlloy,
    data: IntrinsicData,
    map: Mat,
    h: Vect,
    k: Vect,
    positive: bool,
    residuals: BTreeMap<String, f64>,
}

impl ConditionalExpectation {
    /// `G(ap + bq) = ah + b(1 - h)`.
    pub fn from_h(t: &TwoPointAlloy, data: &IntrinsicData, h: &Vect) -> Result<Self> {
        let res = check_h_condition(t, data, h);
        let limit = bound(t.tol(), opnorm(&data.phi) * (1.0 + t.a().coords_norm(h)));
        if !(res <= limit) {
            return Err(Error::HConditionViolation(res));
        }
        let x = t.x();
        let k = t.a_one() - h;
        let mut map = Mat::zeros(t.dim_a(), x.dim());
        for col in 0..x.dim() {
            let (a, b) = t.decompose_coords(&x.unit_coords(col));
            map.set_column(col, &(t.a_mul(&a, h) + t.a_mul(&b, &k)));
        }
        Self::from_map(t, data, map)
    }

    /// Validates a linear map `X -> A` given on X-coordinates.
    pub fn from_map(t: &TwoPointAlloy, data: &IntrinsicData, map: Mat) -> Result<Self> {
        let a = t.a();
        let x = t.x();
        let (da, dx) = (a.dim(), x.dim());
        if map.nrows() != da || map.ncols() != dx {
            return Err(Error::DimensionMismatch { expected: da * dx, found: map.nrows() * map.ncols() });
        }
        let tol = t.tol();
        let scale = 1.0 + opnorm(&map);
        let mut residuals = BTreeMap::new();

        let ident = op_residual(a, &(&map * t.embed_coeff() - Mat::identity(da, da)));
        residuals.insert("identity_on_a".to_string(), ident);
        if !(ident <= bound(tol, scale)) {
            return Err(Error::CheckFailed { name: "identity_on_a".into(), residual: ident });
        }

        let emb = t.embedded_basis();
        let mut bim: f64 = 0.0;
        for (i, k, j) in triples(da, dx) {
            let c = x.element(&x.unit_coords(k));
            let lhs = &map * x.project_coords(&(&emb[i] * c * &emb[j]));
            let gc = map.column(k).into_owned();
            let rhs = t.a_mul(&t.a_mul(&a.unit_coords(i), &gc), &a.unit_coords(j));
            bim = bim.max(a.coords_norm(&(lhs - rhs)));
        }
        residuals.insert("bimodule".to_string(), bim);
        if !(bim <= bound(tol, scale)) {
            return Err(Error::BimoduleViolation(bim));
        }

        let h = &map * x.project_coords(t.p());
        let k = &map * x.project_coords(t.q());
        let unit = a.coords_norm(&(&h + &k - t.a_one()));
        residuals.insert("h_plus_k".to_string(), unit);
        let hcond = check_h_condition(t, data, &h);
        residuals.insert("h_condition".to_string(), hcond);
        if !(hcond <= bound(tol, scale * (1.0 + opnorm(&data.phi)))) {
            return Err(Error::HConditionViolation(hcond));
        }

        let mut pos = f64::INFINITY;
        for c in positivity_samples(dx) {
            let cm = x.element(&c);
            let g = a.element(&(&map * x.project_coords(&(&cm * cm.adjoint()))));
            let herm = (&g + g.adjoint()).unscale(2.0);
            pos = pos.min(min_hermitian_eigenvalue(&herm) / (1.0 + opnorm(&cm).powi(2)));
        }
        residuals.insert("positivity_min".to_string(), pos);
        let positive = pos >= -tol * scale;

        Ok(ConditionalExpectation { alloy: t.clone(), data: data.clone(), map, h, k, positive, residuals })
    }

    /// The expectation `X -> A` that is orthogonal for the trace inner product on the ambient matrices.
    pub fn trace_induced(t: &TwoPointAlloy, data: &IntrinsicData) -> Result<Self> {
        let x = t.x();
        let image = MatrixStarAlgebra::with_ambient(x.ambient_dim(), t.embedded_basis().to_vec(), true, t.tol())?;
        let map = trace_conditional_expectation(&image, x)?;
        Self::from_map(t, data, map)
    }

    pub fn alloy(&self) -> &TwoPointAlloy {
        &self.alloy
    }

    pub fn data(&self) -> &IntrinsicData {
        &self.data
    }

    /// Coefficient matrix, `dim A` by `dim X`.
    pub fn map(&self) -> &Mat {
        &self.map
    }

    pub fn h(&self) -> &Vect {
        &self.h
    }

    pub fn k(&self) -> &Vect {
        &self.k
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn residuals(&self) -> &BTreeMap<String, f64> {
        &self.residuals
    }

    /// `G(c)` for an ambient matrix `c` in X.
    pub fn apply(&self, c: &Mat) -> Result<Vect> {
        Ok(&self.map * self.alloy.x().try_coords(c)?)
    }

    pub fn h_matrix(&self) -> Mat {
        self.alloy.a().element(&self.h)
    }

    pub fn k_matrix(&self) -> Mat {
        self.alloy.a().element(&self.k)
    }
}

/// Largest `|ha - phi(a)h - F_perp(a)|` over basis elements `a`.
pub fn check_h_condition(t: &TwoPointAlloy, data: &IntrinsicData, h: &Vect) -> f64 {
    let a = t.a();
    let fp = data.f_perp();
    (0..a.dim())
        .map(|i| {
            let e = a.unit_coords(i);
            let lhs = t.a_mul(h, &e);
            let rhs = t.a_mul(&(&data.phi * &e), h) + &fp * &e;
            a.coords_norm(&(lhs - rhs))
        })
        .fold(0.0, f64::max)
}

/// Residuals of `E(a) = ha + phi(a)k`, `F(a) = ka + phi(a)h`,
/// `E_perp(a) = ka - phi(a)k` and `F_perp(a) = ha - phi(a)h`.
pub fn explore_condition(g: &ConditionalExpectation) -> [f64; 4] {
    let t = &g.alloy;
    let d = &g.data;
    let a = t.a();
    let (ep, fp) = (d.e_perp(), d.f_perp());
    let mut out = [0.0f64; 4];
    for i in 0..a.dim() {
        let e = a.unit_coords(i);
        let phi = &d.phi * &e;
        let (ha, ka) = (t.a_mul(&g.h, &e), t.a_mul(&g.k, &e));
        let (ph, pk) = (t.a_mul(&phi, &g.h), t.a_mul(&phi, &g.k));
        let res = [
            &d.e * &e - (&ha + &pk),
            &d.f * &e - (&ka + &ph),
            &ep * &e - (&ka - &pk),
            &fp * &e - (&ha - &ph),
        ];
        for (o, r) in out.iter_mut().zip(res.iter()) {
            *o = o.max(a.coords_norm(r));
        }
    }
    out
}

/// Largest `|hk a - phi^2(a) hk|` over basis elements.
pub fn hk_covariance(g: &ConditionalExpectation) -> f64 {
    let t = &g.alloy;
    let a = t.a();
    let hk = t.a_mul(&g.h, &g.k);
    let phi2 = &g.data.phi * &g.data.phi;
    (0..a.dim())
        .map(|i| {
            let e = a.unit_coords(i);
            a.coords_norm(&(t.a_mul(&hk, &e) - t.a_mul(&(&phi2 * &e), &hk)))
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CovarianceCheck {
    pub commutes: bool,
    pub commute_residual: f64,
    pub fixed: bool,
    pub fixed_residual: f64,
}

/// Both covariance tests, `G Phi = phi G` on X and `phi(h) = 1 - h`.
pub fn covariance_check(g: &ConditionalExpectation, phi_x: &Mat) -> CovarianceCheck {
    let t = &g.alloy;
    let a = t.a();
    let tol = t.tol();
    let phi = &g.data.phi;
    let commute_residual = op_residual(a, &(&g.map * phi_x - phi * &g.map));
    let fixed_residual = a.coords_norm(&(phi * &g.h - &g.k));
    let scale = (1.0 + opnorm(&g.map)) * (1.0 + opnorm(phi).max(opnorm(phi_x)));
    CovarianceCheck {
        commutes: commute_residual <= bound(tol, scale),
        commute_residual,
        fixed: fixed_residual <= bound(tol, scale),
        fixed_residual,
    }
}

pub fn is_covariant(g: &ConditionalExpectation, phi_x: &Mat) -> Result<bool> {
    let c = covariance_check(g, phi_x);
    if c.commutes != c.fixed {
        return Err(Error::EquivalenceMismatch { commutes: c.commutes, fixed: c.fixed });
    }
    Ok(c.commutes)
}

/// `G = (G_hat + pi G_hat Pi) / 2` for the involutive polar part `Pi` of `Phi`
/// and its restriction `pi` to A.
pub fn covariantize(
    t: &TwoPointAlloy,
    data: &IntrinsicData,
    g_hat: &ConditionalExpectation,
    big_pi: &Mat,
    pi_a: &Mat,
) -> Result<ConditionalExpectation> {
    let map = (g_hat.map() + pi_a * g_hat.map() * big_pi).unscale(2.0);
    let g = ConditionalExpectation::from_map(t, data, map)?;
    let a = t.a();
    let tol = t.tol();
    let pi_h = a.coords_norm(&(pi_a * &g.h - &g.k));
    let phi_h = a.coords_norm(&(&data.phi * &g.h - &g.k));
    let scale = (1.0 + opnorm(&g.map)) * (1.0 + opnorm(&data.phi));
    if !(pi_h <= bound(tol, scale)) {
        return Err(Error::CheckFailed { name: "pi_h_eq_one_minus_h".into(), residual: pi_h });
    }
    if !(phi_h <= bound(tol, scale)) {
        return Err(Error::CheckFailed { name: "phi_h_eq_one_minus_h".into(), residual: phi_h });
    }
    let (alpha, _) = pimsner_popa_constant(&g);
    if !(alpha > tol) {
        return Err(Error::NotFaithful(alpha));
    }
    Ok(g)
}

/// `alpha`, the smallest eigenvalue of `h` and `k`, together with the smallest normalized eigenvalue of
/// `G(cc^*) - alpha cc^*` over the sample set, read inside X.
pub fn pimsner_popa_constant(g: &ConditionalExpectation) -> (f64, f64) {
    let t = &g.alloy;
    let x = t.x();
    let hm = g.h_matrix();
    let km = g.k_matrix();
    let herm = |m: &Mat| (m + m.adjoint()).unscale(2.0);
    let alpha = min_hermitian_eigenvalue(&herm(&hm)).min(min_hermitian_eigenvalue(&herm(&km)));
    let mut worst = f64::INFINITY;
    for c in positivity_samples(x.dim()) {
        let cm = x.element(&c);
        let cc = &cm * cm.adjoint();
        let gcc = t.embed_elem(&(&g.map * x.project_coords(&cc)));
        let diff = herm(&(gcc - cc.scale(alpha)));
        worst = worst.min(min_hermitian_eigenvalue(&diff) / (1.0 + opnorm(&cc)));
    }
    (alpha, worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct AhZeroVerdict {
    pub a_norm: f64,
    pub ah_norm: f64,
    pub ak_norm: f64,
    /// `alpha |a|`, a lower bound for both products when `G` is faithful.
    pub lower_bound: f64,
    pub holds: bool,
}

/// For a given `a`, checks that `ah` and `ak` are bounded below by `alpha |a|`.
pub fn ahzero_probe(g: &ConditionalExpectation, a: &Vect) -> AhZeroVerdict {
    let t = &g.alloy;
    let alg = t.a();
    let (alpha, _) = pimsner_popa_constant(g);
    let am = alg.element(a);
    let a_norm = opnorm(&am);
    let ah_norm = opnorm(&alg.element(&t.a_mul(a, &g.h)));
    let ak_norm = opnorm(&alg.element(&t.a_mul(a, &g.k)));
    let lower_bound = alpha.max(0.0) * a_norm;
    let slack = g.alloy.tol() * (1.0 + a_norm);
    let holds = if a_norm <= slack {
        true
    } else {
        alpha > g.alloy.tol() && ah_norm + slack >= lower_bound && ak_norm + slack >= lower_bound
    };
    AhZeroVerdict { a_norm, ah_norm, ak_norm, lower_bound, holds }
}

/// A nonzero `a` with `ah = 0` or `ak = 0`, from the smallest right singular vector of
/// right multiplication; `None` when both multiplications are injective.
pub fn kernel_witness(g: &ConditionalExpectation) -> Option<Vect> {
    let t = &g.alloy;
    let alg = t.a();
    let d = alg.dim();
    let tol = t.tol();
    let mut best: Option<(f64, Vect)> = None;
    for m in [&g.h, &g.k] {
        let mut r = Mat::zeros(d, d);
        for i in 0..d {
            r.set_column(i, &t.a_mul(&alg.unit_coords(i), m));
        }
        let svd = r.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let (idx, smin) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        let v: Vect = v_t.row(idx).adjoint();
        let ratio = alg.coords_norm(&(&r * &v)) / alg.coords_norm(&v).max(f64::MIN_POSITIVE);
        let smax = singular_values(&r).iter().cloned().fold(0.0, f64::max);
        if smin <= bound(tol, smax) && best.as_ref().is_none_or(|(b, _)| ratio < *b) {
            best = Some((ratio, v));
        }
    }
    best.map(|(_, v)| v)
}

#[derive(Clone, Debug, Serialize)]
pub struct CondExpReport {
    pub covariant: bool,
    pub alpha: f64,
    pub h_spectrum: Vec<f64>,
    pub faithful: bool,
    pub positive: bool,
    pub residuals: BTreeMap<String, f64>,
}

pub fn report(g: &ConditionalExpectation, phi_x: &Mat) -> Result<CondExpReport> {
    let tol = g.alloy.tol();
    let covariant = is_covariant(g, phi_x)?;
    let (alpha, pp) = pimsner_popa_constant(g);
    let hm = g.h_matrix();
    let mut residuals = g.residuals.clone();
    let ex = explore_condition(g);
    for (name, v) in ["explore.i", "explore.ii", "explore.iii", "explore.iv"].iter().zip(ex) {
        residuals.insert(name.to_string(), v);
    }
    residuals.insert("hk_covariance".into(), hk_covariance(g));
    residuals.insert("h_hermitian".into(), hermitian_residual(&hm));
    residuals.insert("pimsner_popa_min".into(), pp);
    Ok(CondExpReport {
        covariant,
        alpha,
        h_spectrum: hermitian_spectrum(&(&hm + hm.adjoint()).unscale(2.0)),
        faithful: alpha > tol,
        positive: g.positive,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::{real, StarHomomorphism, DEFAULT_TOL};
    use std::sync::Arc;

    fn single_square(r: f64) -> (TwoPointAlloy, IntrinsicData) {
        let s = (r - r * r).sqrt();
        let p = Mat::from_row_slice(2, 2, &[real(r), real(s), real(s), real(1.0 - r)]);
        let a = Arc::new(MatrixStarAlgebra::diagonal(2, DEFAULT_TOL).unwrap());
        let x = Arc::new(MatrixStarAlgebra::full_matrix(2, DEFAULT_TOL).unwrap());
        let t = TwoPointAlloy::new(StarHomomorphism::inclusion(a, x).unwrap(), p).unwrap();
        let d = IntrinsicData::compute(&t).unwrap();
        (t, d)
    }

    fn diag(t: &TwoPointAlloy, x: f64, y: f64) -> Vect {
        t.a().try_coords(&Mat::from_row_slice(2, 2, &[real(x), real(0.0), real(0.0), real(y)])).unwrap()
    }

    #[test]
    fn diagonal_expectation_of_single_square() {
        let (t, d) = single_square(0.25);
        let g = ConditionalExpectation::from_h(&t, &d, &diag(&t, 0.25, 0.75)).unwrap();
        assert!(g.is_positive());
        let off = Mat::from_row_slice(2, 2, &[real(0.0), real(1.0), real(0.0), real(0.0)]);
        assert!(t.a().coords_norm(&g.apply(&off).unwrap()) < 1e-12);
        assert!(explore_condition(&g).iter().all(|&r| r < 1e-12));
        assert!(hk_covariance(&g) < 1e-12);
        assert!(is_covariant(&g, &d.phi_x).unwrap());
        let (alpha, pp) = pimsner_popa_constant(&g);
        assert!((alpha - 0.25).abs() < 1e-12);
        assert!(pp > -1e-12);
        let rep = report(&g, &d.phi_x).unwrap();
        assert!(rep.faithful);
        assert!((rep.h_spectrum[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn trace_induced_matches_unique_expectation() {
        let (t, d) = single_square(0.3);
        let g = ConditionalExpectation::trace_induced(&t, &d).unwrap();
        assert!(t.a().coords_norm(&(g.h() - diag(&t, 0.3, 0.7))) < 1e-12);
    }

    #[test]
    fn invalid_h_is_rejected() {
        let (t, d) = single_square(0.25);
        let res = check_h_condition(&t, &d, &diag(&t, 0.5, 0.5));
        assert!(res > 0.1);
        assert!(matches!(ConditionalExpectation::from_h(&t, &d, &diag(&t, 0.5, 0.5)), Err(Error::HConditionViolation(_))));
        assert!(matches!(ConditionalExpectation::from_h(&t, &d, &t.a_one()), Err(Error::HConditionViolation(_))));
        let zero = t.a().zero_coords();
        let fp_max = op_residual(t.a(), &d.f_perp());
        assert!((check_h_condition(&t, &d, &zero) - fp_max).abs() < 1e-12);
    }

    #[test]
    fn ahzero_on_faithful_and_degenerate() {
        let (t, d) = single_square(0.25);
        let g = ConditionalExpectation::from_h(&t, &d, &diag(&t, 0.25, 0.75)).unwrap();
        assert!(ahzero_probe(&g, &t.a().zero_coords()).holds);
        assert!(ahzero_probe(&g, &diag(&t, 1.0, -2.0)).holds);
        assert!(kernel_witness(&g).is_none());
    }
}

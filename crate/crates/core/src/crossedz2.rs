//! The crossed product `A x_pi Z_2`, alloys built from fundamental data `(pi, h)`,
//! and the reconstruction `A x_pi Z_2 ~ X` for a given alloy.
//!
//! `a + b w` is realized as the block matrix `[[a, b], [pi(b), pi(a)]]` with
//! `w = [[0, 1], [1, 0]]`; X-coordinates are `[a; b]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::autopolar::{verify_phi_polar, AlgebraAutomorphism, PhiPolarReport};
use crate::condexp::{covariantize, ConditionalExpectation};
use crate::error::{Error, Result};
use crate::intrinsic::{basis_pairs, op_residual, IntrinsicData, TwoPointAlloy};
use crate::matalg::{
    bound, hermitian_residual, hermitian_spectrum, opnorm, psd_functional_calculus, real, Mat, MatrixStarAlgebra,
    StarHomomorphism, Vect,
};

/// An involutive *-automorphism `pi` of a unital algebra and `h` with `pi(h) = 1 - h`.
#[derive(Clone, Debug)]
pub struct FundamentalData {
    a: Arc<MatrixStarAlgebra>,
    pi: AlgebraAutomorphism,
    h: Vect,
}

impl FundamentalData {
    pub fn new(a: Arc<MatrixStarAlgebra>, pi: Mat, h: Vect) -> Result<Self> {
        if !a.unital() {
            return Err(Error::MissingIdentity);
        }
        let tol = a.tol();
        let d = a.dim();
        if h.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: h.len() });
        }
        let pi = AlgebraAutomorphism::new(a.clone(), pi)?;
        let scale = opnorm(pi.op()).powi(2);
        let inv = op_residual(&a, &(pi.op() * pi.op() - Mat::identity(d, d)));
        if !(inv <= bound(tol, scale)) {
            return Err(Error::NotInvolutive(inv));
        }
        let star = pi.star_residual();
        if !(star <= bound(tol, scale)) {
            return Err(Error::NotStarAutomorphism(star));
        }
        let hm = a.element(&h);
        let herm = hermitian_residual(&hm);
        if !(herm <= bound(tol, opnorm(&hm))) {
            return Err(Error::InvalidFundamentalData(format!("h is not hermitian (residual {herm:.3e})")));
        }
        let eigs = hermitian_spectrum(&(&hm + hm.adjoint()).unscale(2.0));
        let (lo, hi) = (eigs[0], eigs[eigs.len() - 1]);
        if !(lo > tol && hi < 1.0 - tol) {
            return Err(Error::InvalidFundamentalData(format!("spectrum of h is [{lo:.3e}, {hi:.3e}], outside (0, 1)")));
        }
        let one = a.identity_coords().ok_or(Error::MissingIdentity)?.clone();
        let cov = a.coords_norm(&(pi.op() * &h - (&one - &h)));
        if !(cov <= bound(tol, scale)) {
            return Err(Error::InvalidFundamentalData(format!("pi(h) != 1 - h (residual {cov:.3e})")));
        }
        Ok(FundamentalData { a, pi, h })
    }

    pub fn a(&self) -> &Arc<MatrixStarAlgebra> {
        &self.a
    }

    pub fn pi(&self) -> &AlgebraAutomorphism {
        &self.pi
    }

    pub fn h(&self) -> &Vect {
        &self.h
    }

    pub fn k(&self) -> Vect {
        self.a.identity_coords().expect("checked unital") - &self.h
    }

    /// `(hk)^t` in A-coordinates.
    pub fn hk_power(&self, t: f64) -> Result<Vect> {
        let hk = self.a.element(&self.a.mul_coords(&self.h, &self.k()));
        let herm = (&hk + hk.adjoint()).unscale(2.0);
        self.a.try_coords(&psd_functional_calculus(&herm, t, self.a.tol())?)
    }
}

#[derive(Clone, Debug)]
pub struct CrossedProductAlgebra {
    base: Arc<MatrixStarAlgebra>,
    pi: AlgebraAutomorphism,
    x: Arc<MatrixStarAlgebra>,
    varpi: Mat,
    embed: StarHomomorphism,
}

/// Largest residuals of the block model against `(a + bw)(c + dw) = (ac + b pi(d)) + (ad + b pi(c)) w`
/// and `(a + bw)^* = a^* + pi(b^*) w`, over basis pairs.
#[derive(Clone, Copy, Debug, Default)]
pub struct AbstractRuleResiduals {
    pub multiplication: f64,
    pub adjoint: f64,
}

impl CrossedProductAlgebra {
    pub fn base(&self) -> &Arc<MatrixStarAlgebra> {
        &self.base
    }

    pub fn pi(&self) -> &AlgebraAutomorphism {
        &self.pi
    }

    pub fn x(&self) -> &Arc<MatrixStarAlgebra> {
        &self.x
    }

    pub fn varpi(&self) -> &Mat {
        &self.varpi
    }

    pub fn embed(&self) -> &StarHomomorphism {
        &self.embed
    }

    /// Ambient matrix of `a + b w`.
    pub fn element(&self, a: &Vect, b: &Vect) -> Mat {
        self.embed.image_of(a) + self.embed.image_of(b) * &self.varpi
    }

    /// X-coordinates of `a + b w`.
    pub fn coords(&self, a: &Vect, b: &Vect) -> Vect {
        let d = self.base.dim();
        let mut v = Vect::zeros(2 * d);
        v.rows_mut(0, d).copy_from(a);
        v.rows_mut(d, d).copy_from(b);
        v
    }

    /// `(a, b)` from X-coordinates.
    pub fn split(&self, c: &Vect) -> (Vect, Vect) {
        let d = self.base.dim();
        (c.rows(0, d).into_owned(), c.rows(d, d).into_owned())
    }

    pub fn abstract_rule_residuals(&self) -> AbstractRuleResiduals {
        let a = &self.base;
        let d = a.dim();
        let pi = self.pi.op();
        let x = &self.x;
        let mut out = AbstractRuleResiduals::default();
        for (i, j) in basis_pairs(2 * d) {
            let (a1, b1) = self.split(&x.unit_coords(i));
            let (a2, b2) = self.split(&x.unit_coords(j));
            let first = a.mul_coords(&a1, &a2) + a.mul_coords(&b1, &(pi * &b2));
            let second = a.mul_coords(&a1, &b2) + a.mul_coords(&b1, &(pi * &a2));
            let model = x.element(&x.unit_coords(i)) * x.element(&x.unit_coords(j));
            out.multiplication = out.multiplication.max((model - self.element(&first, &second)).norm());
        }
        for i in 0..2 * d {
            let (a1, b1) = self.split(&x.unit_coords(i));
            let rule = self.element(&a.star_coords(&a1), &(pi * a.star_coords(&b1)));
            out.adjoint = out.adjoint.max((x.element(&x.unit_coords(i)).adjoint() - rule).norm());
        }
        out
    }
}

pub fn build_crossed_product(a: Arc<MatrixStarAlgebra>, pi: &AlgebraAutomorphism) -> Result<CrossedProductAlgebra> {
    let tol = a.tol();
    let d = a.dim();
    let n = a.ambient_dim();
    let scale = opnorm(pi.op()).powi(2);
    let inv = op_residual(&a, &(pi.op() * pi.op() - Mat::identity(d, d)));
    if !(inv <= bound(tol, scale)) {
        return Err(Error::NotInvolutive(inv));
    }
    let star = pi.star_residual();
    if !(star <= bound(tol, scale)) {
        return Err(Error::NotStarAutomorphism(star));
    }
    let block = |tl: &Mat, tr: &Mat, bl: &Mat, br: &Mat| {
        let mut m = Mat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(tl);
        m.view_mut((0, n), (n, n)).copy_from(tr);
        m.view_mut((n, 0), (n, n)).copy_from(bl);
        m.view_mut((n, n), (n, n)).copy_from(br);
        m
    };
    let zero = Mat::zeros(n, n);
    let id = Mat::identity(n, n);
    let varpi = block(&zero, &id, &id, &zero);
    let embedded: Vec<Mat> = (0..d)
        .map(|k| {
            let e = a.unit_coords(k);
            block(&a.element(&e), &zero, &zero, &a.element(&(pi.op() * &e)))
        })
        .collect();
    let mut basis = embedded.clone();
    basis.extend(embedded.iter().map(|m| m * &varpi));
    let x = Arc::new(MatrixStarAlgebra::with_ambient(2 * n, basis, true, tol)?);
    let mut coeff = Mat::zeros(2 * d, d);
    coeff.view_mut((0, 0), (d, d)).copy_from(&Mat::identity(d, d));
    let embed = StarHomomorphism::new(a.clone(), x.clone(), coeff, true)?;
    let cp = CrossedProductAlgebra { base: a, pi: pi.clone(), x, varpi, embed };
    let rules = cp.abstract_rule_residuals();
    let worst = rules.multiplication.max(rules.adjoint);
    if !(worst <= bound(tol, scale)) {
        return Err(Error::CheckFailed { name: "crossed_product_rules".into(), residual: worst });
    }
    Ok(cp)
}

/// `p = (1 + w) / 2` inside the crossed product.
pub fn canonical_alloy(cp: &CrossedProductAlgebra) -> Result<TwoPointAlloy> {
    let n2 = cp.x.ambient_dim();
    let p = (Mat::identity(n2, n2) + &cp.varpi).unscale(2.0);
    TwoPointAlloy::new(cp.embed.clone(), p)
}

/// `G(a + b w) = a` on an alloy whose X is the crossed product `cp`.
pub fn standard_expectation(cp: &CrossedProductAlgebra, t: &TwoPointAlloy, data: &IntrinsicData) -> Result<ConditionalExpectation> {
    let d = cp.base.dim();
    let mut map = Mat::zeros(d, 2 * d);
    map.view_mut((0, 0), (d, d)).copy_from(&Mat::identity(d, d));
    ConditionalExpectation::from_map(t, data, map)
}

/// The crossed product together with the alloy given by `p = h + (hk)^{1/2} w`.
#[derive(Clone, Debug)]
pub struct BuiltAlloy {
    pub crossed: CrossedProductAlgebra,
    pub alloy: TwoPointAlloy,
    /// `(hk)^{1/2}` in A-coordinates.
    pub s: Vect,
}

pub fn build_alloy_from_fundamental_data(fd: &FundamentalData) -> Result<BuiltAlloy> {
    let cp = build_crossed_product(fd.a.clone(), &fd.pi)?;
    let s = fd.hk_power(0.5)?;
    let p = cp.element(&fd.h, &s);
    let proj = (&p * &p - &p).norm().max((&p - p.adjoint()).norm());
    if !(proj <= bound(fd.a.tol(), opnorm(&p))) {
        return Err(Error::NotProjection(proj));
    }
    let alloy = TwoPointAlloy::new(cp.embed.clone(), p)?;
    Ok(BuiltAlloy { crossed: cp, alloy, s })
}

/// Residuals of `phi(a) = s pi(a) s^-1`, `E(a) = ha + phi(a)k` and `F(a) = ka + phi(a)h`
/// with `s = (hk)^{1/2}`, over basis elements of A.
pub fn concrete_formula_residuals(t: &TwoPointAlloy, data: &IntrinsicData, fd: &FundamentalData) -> Result<BTreeMap<String, f64>> {
    let a = t.a();
    let s = fd.hk_power(0.5)?;
    let s_inv = fd.hk_power(-0.5)?;
    let (h, k) = (fd.h.clone(), fd.k());
    let mut out = BTreeMap::new();
    let (mut rphi, mut re, mut rf) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..a.dim() {
        let e = a.unit_coords(i);
        let phi = &data.phi * &e;
        let inner = a.mul_coords(&a.mul_coords(&s, &(fd.pi.op() * &e)), &s_inv);
        rphi = rphi.max(a.coords_norm(&(&phi - inner)));
        re = re.max(a.coords_norm(&(&data.e * &e - a.mul_coords(&h, &e) - a.mul_coords(&phi, &k))));
        rf = rf.max(a.coords_norm(&(&data.f * &e - a.mul_coords(&k, &e) - a.mul_coords(&phi, &h))));
    }
    out.insert("phi_inner_form".into(), rphi);
    out.insert("e_formula".into(), re);
    out.insert("f_formula".into(), rf);
    Ok(out)
}

/// Fundamental data of an alloy together with the objects it was read off from.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub fd: FundamentalData,
    pub expectation: ConditionalExpectation,
    pub polar: PhiPolarReport,
}

/// `pi` from the polar decomposition of `phi`, `h = G(p)` for the covariant `G`
/// obtained by symmetrizing the trace-induced expectation.
pub fn extract_fundamental_data(t: &TwoPointAlloy, data: &IntrinsicData) -> Result<Extraction> {
    let g_hat = ConditionalExpectation::trace_induced(t, data)?;
    let polar = verify_phi_polar(t, data)?;
    let g = covariantize(t, data, &g_hat, &polar.big_pi, &polar.pi_a)?;
    let fd = FundamentalData::new(t.a().clone(), polar.pi_a.clone(), g.h().clone())?;
    Ok(Extraction { fd, expectation: g, polar })
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub rho: StarHomomorphism,
    pub crossed: CrossedProductAlgebra,
    pub u: Mat,
    pub residuals: BTreeMap<String, f64>,
}

impl ReconstructionResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }

    pub fn failures(&self, limit: f64) -> Vec<(String, f64)> {
        self.residuals.iter().filter(|(_, &v)| !(v <= limit)).map(|(k, &v)| (k.clone(), v)).collect()
    }
}

/// Builds `u = (hk)^{-1/2}(kp - hq)` and `rho(a + bw) = a + bu`, with every
/// intermediate identity recorded as a residual.
pub fn reconstruction_residuals(t: &TwoPointAlloy, data: &IntrinsicData, fd: &FundamentalData) -> Result<ReconstructionResult> {
    let a = t.a();
    let x = t.x();
    let (p, q) = (t.p().clone(), t.q().clone());
    let (h, k) = (fd.h.clone(), fd.k());
    let one = t.a_one();
    let hk = a.mul_coords(&h, &k);
    let emb = |c: &Vect| t.embed_elem(c);
    let inv = |c: &Vect| -> Result<Vect> {
        let m = a.element(c).try_inverse().ok_or(Error::NotInvertible(0.0))?;
        a.try_coords(&m)
    };
    let (h_inv, k_inv) = (inv(&h)?, inv(&k)?);
    let s_inv = fd.hk_power(-0.5)?;
    let s = fd.hk_power(0.5)?;
    let n = x.ambient_dim();
    let id = Mat::identity(n, n);

    let mut r = BTreeMap::new();
    let mut put = |name: &str, v: f64| {
        r.insert(name.to_string(), v);
    };
    put("phi_h_eq_k", a.coords_norm(&(&data.phi * &h - &k)));
    put("phi_k_eq_h", a.coords_norm(&(&data.phi * &k - &h)));
    put("hk_fixed.e", a.coords_norm(&(&data.e * &hk - &hk)));
    put("hk_fixed.f", a.coords_norm(&(&data.f * &hk - &hk)));
    put("h_inv_k.e_unit", a.coords_norm(&(&data.e * a.mul_coords(&h_inv, &k) - &one)));
    put("k_inv_h.f_unit", a.coords_norm(&(&data.f * a.mul_coords(&k_inv, &h) - &one)));
    let v = emb(&k) * &p - emb(&h) * &q;
    let u = emb(&s_inv) * &v;
    put("u.isometry", (u.adjoint() * &u - &id).norm());
    let hkm = emb(&hk);
    put("hk_commutes.p", (&hkm * &p - &p * &hkm).norm());
    put("hk_commutes.q", (&hkm * &q - &q * &hkm).norm());
    put("v_eq_p_minus_h", (&v - (&p - emb(&h))).norm());
    put("u.self_adjoint", (&u - u.adjoint()).norm());
    put("u.unitary", (&u * u.adjoint() - &id).norm());
    let uinv = u.clone().try_inverse().ok_or(Error::NotInvertible(0.0))?;
    let mut c8: f64 = 0.0;
    for i in 0..a.dim() {
        let e = a.unit_coords(i);
        c8 = c8.max((emb(&(fd.pi.op() * &e)) - &u * emb(&e) * &uinv).norm());
    }
    put("pi_eq_ad_u", c8);

    let cp = build_crossed_product(fd.a.clone(), &fd.pi)?;
    let d = a.dim();
    let images: Vec<Mat> = (0..2 * d)
        .map(|i| {
            let (ca, cb) = cp.split(&cp.x.unit_coords(i));
            emb(&ca) + emb(&cb) * &u
        })
        .collect();
    let mut coeff = Mat::zeros(x.dim(), 2 * d);
    let mut span: f64 = 0.0;
    for (i, m) in images.iter().enumerate() {
        span = span.max(x.span_residual(m));
        coeff.set_column(i, &x.project_coords(m));
    }
    let rho = StarHomomorphism::new_unchecked(cp.x.clone(), x.clone(), coeff, true)?;
    let hr = rho.residuals();
    put("rho.in_x", span);
    put("rho.multiplicative", hr.multiplicative);
    put("rho.star", hr.star);
    put("rho.unit", hr.unit);
    let rank = rho.rank();
    put("rho.bijective", if rank == x.dim() && rank == cp.x.dim() { 0.0 } else { 1.0 });
    put("rho.hits_p", (rho.image_of(&cp.coords(&h, &s)) - &p).norm());
    let g = ConditionalExpectation::from_h(t, data, &h)?;
    let mut gr: f64 = 0.0;
    for i in 0..2 * d {
        let c = cp.x.unit_coords(i);
        let (ca, _) = cp.split(&c);
        let lhs = g.map() * rho.apply_coords(&c);
        gr = gr.max(a.coords_norm(&(lhs - ca)));
    }
    put("g_rho_eq_rho_h", gr);
    Ok(ReconstructionResult { rho, crossed: cp, u, residuals: r })
}

/// [`reconstruction_residuals`], failing on the first residual above `limit`.
pub fn reconstruction_isomorphism(t: &TwoPointAlloy, data: &IntrinsicData, fd: &FundamentalData, limit: f64) -> Result<ReconstructionResult> {
    let res = reconstruction_residuals(t, data, fd)?;
    if let Some((name, residual)) = res.failures(limit).into_iter().next() {
        return Err(Error::CheckFailed { name, residual });
    }
    Ok(res)
}

/// `C^2` with the coordinate swap, the standard small example.
pub fn swap_on_c2(tol: f64) -> Result<(Arc<MatrixStarAlgebra>, Mat)> {
    let a = Arc::new(MatrixStarAlgebra::diagonal(2, tol)?);
    let mut pi = Mat::zeros(2, 2);
    pi[(0, 1)] = real(1.0);
    pi[(1, 0)] = real(1.0);
    Ok((a, pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blendcheck::classify;
    use crate::matalg::DEFAULT_TOL;

    fn diag2(a: &MatrixStarAlgebra, x: f64, y: f64) -> Vect {
        a.try_coords(&Mat::from_row_slice(2, 2, &[real(x), real(0.0), real(0.0), real(y)])).unwrap()
    }

    #[test]
    fn scalars_give_group_algebra() {
        let a = Arc::new(MatrixStarAlgebra::scalars(1, DEFAULT_TOL).unwrap());
        let pi = AlgebraAutomorphism::identity(a.clone());
        let cp = build_crossed_product(a, &pi).unwrap();
        assert_eq!(cp.x().dim(), 2);
        let w = Mat::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]);
        assert!((cp.varpi() - w).norm() < 1e-15);
    }

    #[test]
    fn swap_crossed_product_is_full_matrix_algebra() {
        let (a, pi) = swap_on_c2(DEFAULT_TOL).unwrap();
        let pi = AlgebraAutomorphism::new(a.clone(), pi).unwrap();
        let cp = build_crossed_product(a, &pi).unwrap();
        assert_eq!(cp.x().dim(), 4);
        let t = canonical_alloy(&cp).unwrap();
        assert!(classify(&t.as_quintuple().unwrap()).unwrap().is_alloy);
        let d = IntrinsicData::compute(&t).unwrap();
        assert!(op_residual(t.a(), &(&d.phi - pi.op())) < 1e-12);
        assert!(op_residual(t.a(), &(&d.e - &d.f)) < 1e-12);
        let g = standard_expectation(&cp, &t, &d).unwrap();
        assert!(t.a().coords_norm(&(g.h() - t.a_one().unscale(2.0))) < 1e-12);
        let w = cp.varpi().clone();
        assert!(t.a().coords_norm(&g.apply(&w).unwrap()) < 1e-12);
    }

    #[test]
    fn fundamental_data_validation() {
        let (a, pi) = swap_on_c2(DEFAULT_TOL).unwrap();
        assert!(FundamentalData::new(a.clone(), pi.clone(), diag2(&a, 0.25, 0.75)).is_ok());
        assert!(FundamentalData::new(a.clone(), pi.clone(), diag2(&a, 0.25, 0.25)).is_err());
        assert!(FundamentalData::new(a.clone(), pi.clone(), diag2(&a, 0.0, 1.0)).is_err());
        let id = Mat::identity(2, 2);
        assert!(FundamentalData::new(a.clone(), id, diag2(&a, 0.25, 0.75)).is_err());
    }

    #[test]
    fn rebuilt_single_square() {
        let (a, pi) = swap_on_c2(DEFAULT_TOL).unwrap();
        let fd = FundamentalData::new(a.clone(), pi, diag2(&a, 0.25, 0.75)).unwrap();
        let built = build_alloy_from_fundamental_data(&fd).unwrap();
        let t = &built.alloy;
        let d = IntrinsicData::compute(t).unwrap();
        assert!(concrete_formula_residuals(t, &d, &fd).unwrap().values().all(|&r| r < 1e-12));
        let e = &d.e * diag2(&a, 1.0, 0.0);
        assert!(a.coords_norm(&(e - t.a_one().scale(0.25))) < 1e-12);
        let rec = reconstruction_isomorphism(t, &d, &fd, 1e-10).unwrap();
        assert!((rec.u - built.crossed.varpi()).norm() < 1e-12);
        let ex = extract_fundamental_data(t, &d).unwrap();
        assert!(ex.fd.pi().distance(fd.pi()) < 1e-9);
        reconstruction_isomorphism(t, &d, &ex.fd, 1e-9).unwrap();
    }

    #[test]
    fn trivial_data_has_central_p() {
        let a = Arc::new(MatrixStarAlgebra::full_matrix(2, DEFAULT_TOL).unwrap());
        let half = a.identity_coords().unwrap().unscale(2.0);
        let fd = FundamentalData::new(a.clone(), Mat::identity(4, 4), half).unwrap();
        let built = build_alloy_from_fundamental_data(&fd).unwrap();
        let t = &built.alloy;
        let d = IntrinsicData::compute(t).unwrap();
        let id = Mat::identity(4, 4);
        assert!(op_residual(&a, &(&d.e - &id)) < 1e-12 && op_residual(&a, &(&d.phi - &id)) < 1e-12);
        let rec = reconstruction_isomorphism(t, &d, &fd, 1e-10).unwrap();
        let n = t.x().ambient_dim();
        assert!((rec.u - (t.p().scale(2.0) - Mat::identity(n, n))).norm() < 1e-12);
    }
}

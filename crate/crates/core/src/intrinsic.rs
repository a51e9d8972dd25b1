//! Intrinsic data of a unital alloy `(A, C^2, X)` with designated projections `p`, `q`.
//!
//! All operators on `A` are coefficient matrices over `A`'s basis; `E_perp`
//! and `F_perp` are always formed on demand as `id - E` and `id - F`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blendcheck::BlendQuintuple;
use crate::error::{Error, Result};
use crate::matalg::{bound, numerical_rank, opnorm, real, Mat, MatrixStarAlgebra, StarHomomorphism, Vect, C64};

/// Basis pairs used for bilinear identities: all pairs up to dimension 32,
/// a fixed pseudo-random sample of 1024 pairs beyond.
pub fn basis_pairs(d: usize) -> Vec<(usize, usize)> {
    if d <= 32 {
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        (0..1024).map(|_| (rng.random_range(0..d), rng.random_range(0..d))).collect()
    }
}

/// Largest element norm of `op` applied to a basis element.
pub fn op_residual(alg: &MatrixStarAlgebra, op: &Mat) -> f64 {
    (0..op.ncols()).map(|k| alg.coords_norm(&op.column(k).into_owned())).fold(0.0, f64::max)
}

fn ensure(name: &str, residual: f64, limit: f64) -> Result<()> {
    if residual > limit || residual.is_nan() {
        return Err(Error::CheckFailed { name: name.to_string(), residual });
    }
    Ok(())
}

/// A unital alloy over `C^2`: an embedding `A -> X` and a projection `p` in `X`
/// such that `(a, b) -> ap + bq` is a linear bijection `A + A -> X`.
#[derive(Clone, Debug)]
pub struct TwoPointAlloy {
    embed: StarHomomorphism,
    p: Mat,
    q: Mat,
    embedded: Vec<Mat>,
    left_inv: Mat,
    right_inv: Mat,
}

impl TwoPointAlloy {
    pub fn new(embed: StarHomomorphism, p: Mat) -> Result<Self> {
        let a = embed.domain().clone();
        let x = embed.codomain().clone();
        if !a.unital() || !embed.unital() {
            return Err(Error::MissingIdentity);
        }
        let tol = x.tol();
        x.try_coords(&p)?;
        let proj_res = (&p * &p - &p).norm().max((&p - p.adjoint()).norm());
        if proj_res > bound(tol, p.norm()) {
            return Err(Error::NotProjection(proj_res));
        }
        let q = x.one() - &p;
        let da = a.dim();
        if x.dim() != 2 * da {
            return Err(Error::SingularDecomposition { rank: x.dim(), expected: 2 * da });
        }
        let embedded: Vec<Mat> = (0..da).map(|k| embed.image_of(&a.unit_coords(k))).collect();
        let mut left = Mat::zeros(x.dim(), 2 * da);
        let mut right = Mat::zeros(x.dim(), 2 * da);
        for (k, ek) in embedded.iter().enumerate() {
            left.set_column(k, &x.project_coords(&(ek * &p)));
            left.set_column(da + k, &x.project_coords(&(ek * &q)));
            right.set_column(k, &x.project_coords(&(&p * ek)));
            right.set_column(da + k, &x.project_coords(&(&q * ek)));
        }
        let rank = numerical_rank(&left, tol);
        if rank < 2 * da {
            return Err(Error::SingularDecomposition { rank, expected: 2 * da });
        }
        let left_inv = left.try_inverse().ok_or(Error::SingularDecomposition { rank, expected: 2 * da })?;
        let right_inv = right
            .clone()
            .try_inverse()
            .ok_or(Error::SingularDecomposition { rank: numerical_rank(&right, tol), expected: 2 * da })?;
        Ok(TwoPointAlloy { embed, p, q, embedded, left_inv, right_inv })
    }

    pub fn a(&self) -> &Arc<MatrixStarAlgebra> {
        self.embed.domain()
    }

    pub fn x(&self) -> &Arc<MatrixStarAlgebra> {
        self.embed.codomain()
    }

    pub fn embed(&self) -> &StarHomomorphism {
        &self.embed
    }

    pub fn p(&self) -> &Mat {
        &self.p
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn tol(&self) -> f64 {
        self.x().tol()
    }

    pub fn dim_a(&self) -> usize {
        self.a().dim()
    }

    /// Ambient matrix of `embed(a)` for A-coordinates `a`.
    pub fn embed_elem(&self, a: &Vect) -> Mat {
        self.embed.image_of(a)
    }

    /// `embed(a_k)` for the k-th basis element.
    pub fn embedded_basis(&self) -> &[Mat] {
        &self.embedded
    }

    /// `ap + bq` as an ambient matrix.
    pub fn compose(&self, a: &Vect, b: &Vect) -> Mat {
        self.embed_elem(a) * &self.p + self.embed_elem(b) * &self.q
    }

    /// `(a, b)` with `c = ap + bq`, from X-coordinates of `c`.
    pub fn decompose_coords(&self, cx: &Vect) -> (Vect, Vect) {
        let v = &self.left_inv * cx;
        let d = self.dim_a();
        (v.rows(0, d).into_owned(), v.rows(d, d).into_owned())
    }

    /// `(a', b')` with `c = p a' + q b'`, from X-coordinates of `c`.
    pub fn decompose_right_coords(&self, cx: &Vect) -> (Vect, Vect) {
        let v = &self.right_inv * cx;
        let d = self.dim_a();
        (v.rows(0, d).into_owned(), v.rows(d, d).into_owned())
    }

    pub fn decompose(&self, c: &Mat) -> Result<(Vect, Vect)> {
        Ok(self.decompose_coords(&self.x().try_coords(c)?))
    }

    pub fn a_mul(&self, x: &Vect, y: &Vect) -> Vect {
        self.a().mul_coords(x, y)
    }

    pub fn a_star(&self, x: &Vect) -> Vect {
        self.a().star_coords(x)
    }

    pub fn a_one(&self) -> Vect {
        self.a().identity_coords().expect("alloy base is unital").clone()
    }

    /// X-coordinates of `embed(A)`, one column per basis element of `A`.
    pub fn embed_coeff(&self) -> &Mat {
        self.embed.coeff()
    }

    /// The quintuple `(A, C^2, embed, j, X)` with `j(e1) = p`, `j(e2) = q`.
    pub fn as_quintuple(&self) -> Result<BlendQuintuple> {
        let tol = self.tol();
        let b = Arc::new(MatrixStarAlgebra::diagonal(2, tol)?);
        let j = StarHomomorphism::from_images(b, self.x().clone(), &[self.p.clone(), self.q.clone()], true)?;
        BlendQuintuple::new(self.embed.clone(), j)
    }
}

/// `(a, b)` with `c = ap + bq`, with the recombination residual checked.
pub fn unique_decompose(t: &TwoPointAlloy, c: &Mat) -> Result<(Vect, Vect)> {
    let (a, b) = t.decompose(c)?;
    let res = (t.compose(&a, &b) - c).norm();
    ensure("unique_decompose", res, bound(t.tol(), c.norm()))?;
    Ok((a, b))
}

/// Left intrinsic pair `(E, F)`: `pap = E(a)p` and `qaq = F(a)q`.
pub fn compute_intrinsic_pair(t: &TwoPointAlloy) -> Result<(Mat, Mat)> {
    let (x, d) = (t.x(), t.dim_a());
    let mut e = Mat::zeros(d, d);
    let mut f = Mat::zeros(d, d);
    let mut f_perp = Mat::zeros(d, d);
    let mut e_perp = Mat::zeros(d, d);
    for (k, ak) in t.embedded_basis().iter().enumerate() {
        let (ea, fpa) = t.decompose_coords(&x.project_coords(&(t.p() * ak)));
        let (epa, fa) = t.decompose_coords(&x.project_coords(&(t.q() * ak)));
        e.set_column(k, &ea);
        f_perp.set_column(k, &fpa);
        e_perp.set_column(k, &epa);
        f.set_column(k, &fa);
    }
    let id = Mat::identity(d, d);
    let tol = t.tol();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let ak = &t.embedded_basis()[k];
        let ek = t.embed_elem(&e.column(k).into_owned());
        let fk = t.embed_elem(&f.column(k).into_owned());
        worst = worst.max((t.p() * ak * t.p() - ek * t.p()).norm());
        worst = worst.max((t.q() * ak * t.q() - fk * t.q()).norm());
    }
    ensure("intrinsic_pair.defining", worst, bound(tol, 1.0))?;
    let r1 = op_residual(t.a(), &(&f_perp - (&id - &f)));
    let r2 = op_residual(t.a(), &(&e_perp - (&id - &e)));
    ensure("intrinsic_pair.complements", r1.max(r2), bound(tol, opnorm(&e) + opnorm(&f)))?;
    Ok((e, f))
}

/// Right intrinsic pair `(E_*, F_*)`: `pap = p E_*(a)` and `qaq = q F_*(a)`.
pub fn compute_right_pair(t: &TwoPointAlloy) -> Result<(Mat, Mat)> {
    let (x, d) = (t.x(), t.dim_a());
    let mut es = Mat::zeros(d, d);
    let mut fs = Mat::zeros(d, d);
    let mut es_perp = Mat::zeros(d, d);
    let mut fs_perp = Mat::zeros(d, d);
    for (k, ak) in t.embedded_basis().iter().enumerate() {
        let (esa, fspa) = t.decompose_right_coords(&x.project_coords(&(ak * t.p())));
        let (espa, fsa) = t.decompose_right_coords(&x.project_coords(&(ak * t.q())));
        es.set_column(k, &esa);
        fs_perp.set_column(k, &fspa);
        es_perp.set_column(k, &espa);
        fs.set_column(k, &fsa);
    }
    let id = Mat::identity(d, d);
    let tol = t.tol();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let ak = &t.embedded_basis()[k];
        let ek = t.embed_elem(&es.column(k).into_owned());
        let fk = t.embed_elem(&fs.column(k).into_owned());
        worst = worst.max((t.p() * ak * t.p() - t.p() * ek).norm());
        worst = worst.max((t.q() * ak * t.q() - t.q() * fk).norm());
    }
    ensure("right_pair.defining", worst, bound(tol, 1.0))?;
    let r1 = op_residual(t.a(), &(&fs_perp - (&id - &fs)));
    let r2 = op_residual(t.a(), &(&es_perp - (&id - &es)));
    ensure("right_pair.complements", r1.max(r2), bound(tol, opnorm(&es) + opnorm(&fs)))?;
    Ok((es, fs))
}

/// Largest multiplicativity defect of an operator on `alg` over basis pairs.
pub fn multiplicativity_residual(alg: &MatrixStarAlgebra, op: &Mat) -> f64 {
    basis_pairs(alg.dim())
        .into_iter()
        .map(|(i, j)| {
            let (ei, ej) = (alg.unit_coords(i), alg.unit_coords(j));
            let lhs = op * alg.mul_coords(&ei, &ej);
            let rhs = alg.mul_coords(&(op * &ei), &(op * &ej));
            alg.coords_norm(&(lhs - rhs))
        })
        .fold(0.0, f64::max)
}

/// `phi = E + F - id` and `phi_inv = E_* + F_* - id`, after checking the joint relations.
pub fn intrinsic_automorphism(t: &TwoPointAlloy, e: &Mat, f: &Mat, es: &Mat, fs: &Mat) -> Result<(Mat, Mat)> {
    let a = t.a();
    let d = a.dim();
    let id = Mat::identity(d, d);
    let tol = t.tol();
    let scale = 1.0 + opnorm(e) * opnorm(es) + opnorm(f) * opnorm(fs);
    for (name, res) in joint_rel_residuals(a, e, f, es, fs).iter() {
        ensure(name, *res, bound(tol, scale))?;
    }
    let phi = e + f - &id;
    let phi_inv = es + fs - &id;
    let mult = multiplicativity_residual(a, &phi);
    if mult > bound(tol, opnorm(&phi).powi(2)) {
        return Err(Error::MultiplicativityViolation(mult));
    }
    let inv = op_residual(a, &(&phi * &phi_inv - &id)).max(op_residual(a, &(&phi_inv * &phi - &id)));
    ensure("phi_inverse", inv, bound(tol, opnorm(&phi) * opnorm(&phi_inv)))?;
    Ok((phi, phi_inv))
}

pub fn joint_rel_residuals(a: &MatrixStarAlgebra, e: &Mat, f: &Mat, es: &Mat, fs: &Mat) -> [(&'static str, f64); 4] {
    [
        ("joint_rel.i", op_residual(a, &(e * es - e))),
        ("joint_rel.ii", op_residual(a, &(f * es - es))),
        ("joint_rel.iii", op_residual(a, &(f * fs - f))),
        ("joint_rel.iv", op_residual(a, &(e * fs - fs))),
    ]
}

/// `Phi(ap + bq) = phi(b)p + phi(a)q` as an operator on X-coordinates.
pub fn extend_phi(t: &TwoPointAlloy, phi: &Mat) -> Result<Mat> {
    let x = t.x();
    let dx = x.dim();
    let mut out = Mat::zeros(dx, dx);
    for k in 0..dx {
        let (a, b) = t.decompose_coords(&x.unit_coords(k));
        let img = t.compose(&(phi * b), &(phi * a));
        out.set_column(k, &x.project_coords(&img));
    }
    let mult = multiplicativity_residual(x, &out);
    if mult > bound(t.tol(), opnorm(&out).powi(2)) {
        return Err(Error::MultiplicativityViolation(mult));
    }
    let rank = numerical_rank(&out, t.tol());
    if rank < dx {
        return Err(Error::NotInvertible(rank as f64));
    }
    Ok(out)
}

/// The operators attached to a two-point alloy.
#[derive(Clone, Debug)]
pub struct IntrinsicData {
    pub e: Mat,
    pub f: Mat,
    pub e_star: Mat,
    pub f_star: Mat,
    pub phi: Mat,
    pub phi_inv: Mat,
    pub phi_x: Mat,
}

impl IntrinsicData {
    pub fn compute(t: &TwoPointAlloy) -> Result<Self> {
        let (e, f) = compute_intrinsic_pair(t)?;
        let (e_star, f_star) = compute_right_pair(t)?;
        let (phi, phi_inv) = intrinsic_automorphism(t, &e, &f, &e_star, &f_star)?;
        let phi_x = extend_phi(t, &phi)?;
        Ok(IntrinsicData { e, f, e_star, f_star, phi, phi_inv, phi_x })
    }

    pub fn e_perp(&self) -> Mat {
        Mat::identity(self.e.nrows(), self.e.ncols()) - &self.e
    }

    pub fn f_perp(&self) -> Mat {
        Mat::identity(self.f.nrows(), self.f.ncols()) - &self.f
    }
}

/// `c^*` computed from the decomposition of `c` and the left intrinsic pair.
pub fn star_via_intrinsic(t: &TwoPointAlloy, data: &IntrinsicData, c: &Mat) -> Result<Mat> {
    let (a, b) = t.decompose(c)?;
    let (sa, sb) = (t.a_star(&a), t.a_star(&b));
    let first = &data.e * &sa + data.e_perp() * &sb;
    let second = data.f_perp() * &sa + &data.f * &sb;
    Ok(t.compose(&first, &second))
}

/// `c1 c2` computed from the decompositions and the left intrinsic pair.
pub fn multiply_via_intrinsic(t: &TwoPointAlloy, data: &IntrinsicData, c1: &Mat, c2: &Mat) -> Result<Mat> {
    let (a1, b1) = t.decompose(c1)?;
    let (a2, b2) = t.decompose(c2)?;
    let first = t.a_mul(&a1, &(&data.e * &a2)) + t.a_mul(&b1, &(data.e_perp() * &a2));
    let second = t.a_mul(&a1, &(data.f_perp() * &b2)) + t.a_mul(&b1, &(&data.f * &b2));
    Ok(t.compose(&first, &second))
}

/// Residuals of the relations between the intrinsic maps, each named by the identity it checks.
pub fn identity_residuals(t: &TwoPointAlloy, data: &IntrinsicData) -> Vec<(&'static str, f64)> {
    let a = t.a();
    let x = t.x();
    let d = a.dim();
    let id = Mat::identity(d, d);
    let (e, f) = (&data.e, &data.f);
    let (ep, fp) = (data.e_perp(), data.f_perp());
    let mut many = [0.0f64; 4];
    for (i, j) in basis_pairs(d) {
        let (ai, aj) = (a.unit_coords(i), a.unit_coords(j));
        let ab = t.a_mul(&ai, &aj);
        let m = |l: &Mat, r: &Mat| t.a_mul(&(l * &ai), &(r * &aj));
        many[0] = many[0].max(a.coords_norm(&(e * &ab - m(e, e) - m(&fp, &ep))));
        many[1] = many[1].max(a.coords_norm(&(f * &ab - m(&ep, &fp) - m(f, f))));
        many[2] = many[2].max(a.coords_norm(&(&ep * &ab - m(&ep, e) - m(f, &ep))));
        many[3] = many[3].max(a.coords_norm(&(&fp * &ab - m(e, &fp) - m(&fp, f))));
    }
    let mut out = vec![
        ("idempotent.e", op_residual(a, &(e * e - e))),
        ("idempotent.f", op_residual(a, &(f * f - f))),
        ("many_rels.i", many[0]),
        ("many_rels.ii", many[1]),
        ("many_rels.iii", many[2]),
        ("many_rels.iv", many[3]),
    ];
    out.extend(joint_rel_residuals(a, e, f, &data.e_star, &data.f_star));
    out.push(("phi_multiplicative", multiplicativity_residual(a, &data.phi)));
    out.push(("phi_inverse", op_residual(a, &(&data.phi * &data.phi_inv - &id))));
    out.push(("phi_e_eq_f_phi", op_residual(a, &(&data.phi * e - f * &data.phi))));
    out.push(("phi_f_eq_e_phi", op_residual(a, &(&data.phi * f - e * &data.phi))));

    let mut pa_res: f64 = 0.0;
    for (k, ak) in t.embedded_basis().iter().enumerate() {
        let ek = a.unit_coords(k);
        let rhs = t.embed_elem(&(&data.phi * &ek)) * t.p() + t.embed_elem(&(&fp * &ek));
        pa_res = pa_res.max((t.p() * ak - rhs).norm());
    }
    out.push(("pa_phi_f_perp", pa_res));

    let dx = x.dim();
    let phi_x_inv = data.phi_x.clone().try_inverse().unwrap_or_else(|| Mat::from_element(dx, dx, C64::new(f64::NAN, 0.0)));
    out.push(("star_other_side.i", op_residual(a, &(a.star_conjugate_map(e) - &data.e_star))));
    out.push(("star_other_side.ii", op_residual(a, &(a.star_conjugate_map(f) - &data.f_star))));
    out.push(("star_other_side.iii", op_residual(a, &(a.star_conjugate_map(&data.phi) - &data.phi_inv))));
    out.push(("star_other_side.iv", op_residual(x, &(x.star_conjugate_map(&data.phi_x) - &phi_x_inv))));

    let j = t.embed_coeff();
    out.push(("phi_extension.restricts", op_residual(x, &(&data.phi_x * j - j * &data.phi))));
    let pc = x.project_coords(t.p());
    let qc = x.project_coords(t.q());
    out.push(("phi_extension.swaps", x.coords_norm(&(&data.phi_x * &pc - &qc)).max(x.coords_norm(&(&data.phi_x * &qc - &pc)))));
    out.push(("phi_extension.multiplicative", multiplicativity_residual(x, &data.phi_x)));
    let sq = &data.phi_x * &data.phi_x;
    out.push(("phi_extension.square_fixes_p", x.coords_norm(&(&sq * &pc - &pc))));

    let mut mult: f64 = 0.0;
    let mut star: f64 = 0.0;
    for (i, k) in basis_pairs(dx) {
        let (ci, ck) = (&x.basis()[i], &x.basis()[k]);
        if let Ok(m) = multiply_via_intrinsic(t, data, ci, ck) {
            mult = mult.max((m - ci * ck).norm());
        } else {
            mult = f64::INFINITY;
        }
    }
    for c in x.basis() {
        star = match star_via_intrinsic(t, data, c) {
            Ok(s) => star.max((s - c.adjoint()).norm()),
            Err(_) => f64::INFINITY,
        };
    }
    out.push(("formula_for_mult", mult));
    out.push(("formula_for_star", star));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct StrictnessReport {
    /// Smallest ratio `|ap|_2 / |a|_2` in Hilbert-Schmidt norms (exact).
    pub k_hs_p: f64,
    pub k_hs_q: f64,
    /// Smallest sampled and refined ratio `|ap| / |a|` in operator norms.
    pub k_op_p: f64,
    pub k_op_q: f64,
    pub samples: usize,
    /// Smallest sampled `|E(a*a)| / |a|^2`; must dominate `k_op_p^2`.
    pub e_ratio_min: f64,
    pub f_ratio_min: f64,
    /// Largest sampled violation of `|E(a*a)| >= |ap|^2` and `|F(a*a)| >= |aq|^2`.
    pub e_violation: f64,
    pub f_violation: f64,
}

fn min_generalized_singular_value(top: &Mat, base: &Mat) -> f64 {
    let r = base.clone().qr().r();
    match r.try_inverse() {
        Some(rinv) => {
            let sv = (top * rinv).singular_values();
            sv.iter().cloned().fold(f64::INFINITY, f64::min)
        }
        None => 0.0,
    }
}

fn complex_gaussian_coords(rng: &mut ChaCha8Rng, d: usize) -> Vect {
    use rand_distr::{Distribution, StandardNormal};
    Vect::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Strictness constants of the maps `a -> ap` and `a -> aq`.
pub fn strictness_constant(t: &TwoPointAlloy, data: &IntrinsicData, samples: usize, seed: u64) -> StrictnessReport {
    let d = t.dim_a();
    let n2 = t.x().ambient_dim().pow(2);
    let mut base = Mat::zeros(n2, d);
    let mut top_p = Mat::zeros(n2, d);
    let mut top_q = Mat::zeros(n2, d);
    for (k, ak) in t.embedded_basis().iter().enumerate() {
        base.set_column(k, &crate::matalg::vectorize(ak));
        top_p.set_column(k, &crate::matalg::vectorize(&(ak * t.p())));
        top_q.set_column(k, &crate::matalg::vectorize(&(ak * t.q())));
    }
    let k_hs_p = min_generalized_singular_value(&top_p, &base);
    let k_hs_q = min_generalized_singular_value(&top_q, &base);

    let ratio = |a: &Vect, proj: &Mat| -> f64 {
        let ea = t.embed_elem(a);
        let na = opnorm(&ea);
        if na == 0.0 {
            f64::INFINITY
        } else {
            opnorm(&(&ea * proj)) / na
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_p = (f64::INFINITY, Vect::zeros(d));
    let mut best_q = (f64::INFINITY, Vect::zeros(d));
    let mut e_ratio_min = f64::INFINITY;
    let mut f_ratio_min = f64::INFINITY;
    let mut e_violation: f64 = 0.0;
    let mut f_violation: f64 = 0.0;
    for _ in 0..samples {
        let a = complex_gaussian_coords(&mut rng, d);
        let rp = ratio(&a, t.p());
        let rq = ratio(&a, t.q());
        if rp < best_p.0 {
            best_p = (rp, a.clone());
        }
        if rq < best_q.0 {
            best_q = (rq, a.clone());
        }
        let ea = t.embed_elem(&a);
        let na2 = opnorm(&ea).powi(2);
        let asa = t.a_mul(&t.a_star(&a), &a);
        let e_norm = opnorm(&t.embed_elem(&(&data.e * &asa)));
        let f_norm = opnorm(&t.embed_elem(&(&data.f * &asa)));
        e_ratio_min = e_ratio_min.min(e_norm / na2);
        f_ratio_min = f_ratio_min.min(f_norm / na2);
        e_violation = e_violation.max(opnorm(&(&ea * t.p())).powi(2) - e_norm);
        f_violation = f_violation.max(opnorm(&(&ea * t.q())).powi(2) - f_norm);
    }
    let refine = |start: (f64, Vect), proj: &Mat, rng: &mut ChaCha8Rng| -> f64 {
        let (mut val, mut a) = start;
        if !val.is_finite() {
            return val;
        }
        let mut step = 0.5 * a.norm();
        while step > 1e-10 * a.norm().max(1e-300) {
            let mut improved = false;
            for _ in 0..4 * d {
                let cand = &a + complex_gaussian_coords(rng, d) * real(step / (2.0 * d as f64).sqrt());
                let v = ratio(&cand, proj);
                if v < val {
                    val = v;
                    a = cand;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        val
    };
    let k_op_p = refine(best_p, &t.p().clone(), &mut rng);
    let k_op_q = refine(best_q, &t.q().clone(), &mut rng);
    StrictnessReport {
        k_hs_p,
        k_hs_q,
        k_op_p,
        k_op_q,
        samples,
        e_ratio_min,
        f_ratio_min,
        e_violation: e_violation.max(0.0),
        f_violation: f_violation.max(0.0),
    }
}

//! The projections `p(r)` in `M_2`, their single-square alloys, truncated direct sums,
//! and the decay of the constant `K` in `|aP| >= K |a|` along a sequence `r_m`.

use std::sync::Arc;

use serde::Serialize;

use crate::blendcheck::{classify, BlendQuintuple, BlendVerdict};
use crate::error::{Error, Result};
use crate::intrinsic::{op_residual, IntrinsicData, TwoPointAlloy};
use crate::matalg::{opnorm, real, Mat, MatrixStarAlgebra, StarHomomorphism, Vect, DEFAULT_TOL};

fn check_open_unit(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::DomainViolation(format!("r = {r} is not in (0, 1)")));
    }
    Ok(())
}

fn p_formula(r: f64) -> Mat {
    let s = (r - r * r).max(0.0).sqrt();
    Mat::from_row_slice(2, 2, &[real(r), real(s), real(s), real(1.0 - r)])
}

/// `[[r, sqrt(r - r^2)], [sqrt(r - r^2), 1 - r]]` for `0 < r < 1`.
pub fn p_of_r(r: f64) -> Result<Mat> {
    check_open_unit(r)?;
    Ok(p_formula(r))
}

/// `(A, C^2, X)` with `A` the diagonal matrices, `X = M_2` and `C^2` spanned by `p(r)`, `1 - p(r)`.
pub fn single_square(r: f64) -> Result<(TwoPointAlloy, BlendQuintuple)> {
    let p = p_of_r(r)?;
    let a = Arc::new(MatrixStarAlgebra::diagonal(2, DEFAULT_TOL)?);
    let x = Arc::new(MatrixStarAlgebra::full_matrix(2, DEFAULT_TOL)?);
    let t = TwoPointAlloy::new(StarHomomorphism::inclusion(a.clone(), x.clone())?, p.clone())?;
    let b = Arc::new(MatrixStarAlgebra::new(vec![p.clone(), Mat::identity(2, 2) - p], true, DEFAULT_TOL)?);
    let q = BlendQuintuple::new(StarHomomorphism::inclusion(a, x.clone())?, StarHomomorphism::inclusion(b, x)?)?;
    Ok((t, q))
}

/// `E` and `F` for `p(r)`, as coefficient matrices over the basis `diag(1,0)`, `diag(0,1)`.
pub fn single_square_intrinsic(r: f64) -> Result<(Mat, Mat)> {
    let (t, _) = single_square(r)?;
    let d = IntrinsicData::compute(&t)?;
    Ok((d.e, d.f))
}

/// `E(diag(x, y)) = (rx + (1 - r)y) 1` in the diagonal basis.
pub fn closed_form_e(r: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[real(r), real(1.0 - r), real(r), real(1.0 - r)])
}

/// `F(diag(x, y)) = ((1 - r)x + ry) 1` in the diagonal basis.
pub fn closed_form_f(r: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[real(1.0 - r), real(r), real(1.0 - r), real(r)])
}

/// Exact `inf |ap| / |a|` over nonzero diagonal `a`, in operator norms.
pub fn exact_block_constant(r: f64) -> f64 {
    r.min(1.0 - r).max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionFamily {
    r_values: Vec<f64>,
}

impl ProjectionFamily {
    pub fn new(r_values: Vec<f64>) -> Result<Self> {
        if r_values.is_empty() {
            return Err(Error::DomainViolation("empty r sequence".into()));
        }
        for &r in &r_values {
            check_open_unit(r)?;
        }
        Ok(ProjectionFamily { r_values })
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn len(&self) -> usize {
        self.r_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_values.is_empty()
    }

    pub fn p(&self, m: usize) -> Mat {
        p_formula(self.r_values[m])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Preset {
    /// `r_m = 1/m`
    Harmonic,
    /// `r_m = 2^-m`
    Geometric,
    /// `r_m = 1/2`
    Constant,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(Preset::Harmonic),
            "geometric" => Ok(Preset::Geometric),
            "constant" => Ok(Preset::Constant),
            other => Err(Error::DomainViolation(format!("unknown preset `{other}`"))),
        }
    }
}

/// `r_1, ..., r_n` for a preset, indexed from `m = 1`.
pub fn preset_sequence(preset: Preset, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|m| match preset {
            Preset::Harmonic => 1.0 / m as f64,
            Preset::Geometric => 0.5f64.powi(m as i32),
            Preset::Constant => 0.5,
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub r: f64,
    pub exact: f64,
    /// Sampled operator-norm constant of the single square.
    pub sampled: f64,
    pub closed_form_residual: f64,
}

#[derive(Clone, Debug)]
pub struct TruncatedBlend {
    pub n: usize,
    pub family: ProjectionFamily,
    pub blend: BlendQuintuple,
    pub alloy: TwoPointAlloy,
    pub verdict: BlendVerdict,
    pub big_p: Mat,
    /// Largest `|Pa - E(a)P - F_perp(a)Q|` over basis elements.
    pub decomposition_residual: f64,
    /// Largest deviation of the blockwise `E`, `F` from their closed forms.
    pub closed_form_residual: f64,
    pub levels: Vec<LevelReport>,
}

/// Direct sum of `N` single squares inside the block-diagonal `M_2 + ... + M_2`.
pub fn truncated_blend(family: &ProjectionFamily) -> Result<TruncatedBlend> {
    let n = family.len();
    let tol = DEFAULT_TOL;
    let a = Arc::new(MatrixStarAlgebra::diagonal(2 * n, tol)?);
    let x = Arc::new(MatrixStarAlgebra::block_diagonal(&vec![2; n], tol)?);
    let mut big_p = Mat::zeros(2 * n, 2 * n);
    for m in 0..n {
        big_p.view_mut((2 * m, 2 * m), (2, 2)).copy_from(&family.p(m));
    }
    let big_q = Mat::identity(2 * n, 2 * n) - &big_p;
    let b = Arc::new(MatrixStarAlgebra::new(vec![big_p.clone(), big_q.clone()], true, tol)?);
    let blend = BlendQuintuple::new(StarHomomorphism::inclusion(a.clone(), x.clone())?, StarHomomorphism::inclusion(b, x.clone())?)?;
    let verdict = classify(&blend)?;
    let alloy = TwoPointAlloy::new(StarHomomorphism::inclusion(a.clone(), x)?, big_p.clone())?;
    let data = IntrinsicData::compute(&alloy)?;

    let fp = data.f_perp();
    let mut dec: f64 = 0.0;
    for k in 0..a.dim() {
        let e = a.unit_coords(k);
        let lhs = &big_p * alloy.embed_elem(&e);
        let rhs = alloy.compose(&(&data.e * &e), &(&fp * &e));
        dec = dec.max((lhs - rhs).norm());
    }

    // the diagonal basis of A is e_11, e_22, ... so block m owns coordinates 2m, 2m + 1
    let mut closed = Mat::zeros(2 * n, 2 * n);
    let mut closed_f = Mat::zeros(2 * n, 2 * n);
    for (m, &r) in family.r_values().iter().enumerate() {
        closed.view_mut((2 * m, 2 * m), (2, 2)).copy_from(&closed_form_e(r));
        closed_f.view_mut((2 * m, 2 * m), (2, 2)).copy_from(&closed_form_f(r));
    }
    let closed_form_residual = op_residual(&a, &(&data.e - closed)).max(op_residual(&a, &(&data.f - closed_f)));

    let mut levels = Vec::with_capacity(n);
    for &r in family.r_values() {
        let (t, _) = single_square(r)?;
        let d = IntrinsicData::compute(&t)?;
        let rep = crate::intrinsic::strictness_constant(&t, &d, 64, 0);
        let res = op_residual(t.a(), &(&d.e - closed_form_e(r))).max(op_residual(t.a(), &(&d.f - closed_form_f(r))));
        levels.push(LevelReport { r, exact: exact_block_constant(r), sampled: rep.k_op_p, closed_form_residual: res });
    }

    Ok(TruncatedBlend {
        n,
        family: family.clone(),
        blend,
        alloy,
        verdict,
        big_p,
        decomposition_residual: dec,
        closed_form_residual,
        levels,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub m: usize,
    pub r: f64,
    /// `|aP|` for `a = diag(1, 0)` in block `m` and zero elsewhere.
    pub witness_norm: f64,
    pub sqrt_r: f64,
    /// `min_{m' <= m} |a_{m'} P|`, an upper bound for `K_m`.
    pub k_upper: f64,
    pub exact_block: f64,
    /// `min_{m' <= m}` of the exact block constants.
    pub k_exact: f64,
}

/// One row per level. Accepts `r` in `(0, 1]`; at `r = 1` the projection is `diag(1, 0)`.
pub fn strictness_decay(r_values: &[f64]) -> Result<Vec<DecayRow>> {
    let mut rows = Vec::with_capacity(r_values.len());
    let mut k_upper = f64::INFINITY;
    let mut k_exact = f64::INFINITY;
    let witness = Mat::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(0.0)]);
    for (i, &r) in r_values.iter().enumerate() {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::DomainViolation(format!("r = {r} is not in (0, 1]")));
        }
        // aP vanishes outside block m, so its norm is that of the 2x2 block
        let witness_norm = opnorm(&(&witness * p_formula(r)));
        k_upper = k_upper.min(witness_norm);
        let exact_block = exact_block_constant(r);
        k_exact = k_exact.min(exact_block);
        rows.push(DecayRow { m: i + 1, r, witness_norm, sqrt_r: r.sqrt(), k_upper, exact_block, k_exact });
    }
    Ok(rows)
}

/// `|aP|` over the whole truncation, assembled as a `2N x 2N` matrix.
pub fn witness_norm_assembled(r_values: &[f64], m: usize) -> f64 {
    let n = r_values.len();
    let mut a = Mat::zeros(2 * n, 2 * n);
    a[(2 * m, 2 * m)] = real(1.0);
    let mut big_p = Mat::zeros(2 * n, 2 * n);
    for (k, &r) in r_values.iter().enumerate() {
        big_p.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&p_formula(r));
    }
    opnorm(&(a * big_p))
}

/// CSV with header `m,r,witness_norm,sqrt_r,k_upper,exact_block,k_exact`.
pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut out = String::from("m,r,witness_norm,sqrt_r,k_upper,exact_block,k_exact\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.m, r.r, r.witness_norm, r.sqrt_r, r.k_upper, r.exact_block, r.k_exact
        ));
    }
    out
}

/// Diagonal `a = diag(x, y)` in A-coordinates of a single square.
pub fn diag_coords(x: f64, y: f64) -> Vect {
    Vect::from_vec(vec![real(x), real(y)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        let half = p_of_r(0.5).unwrap();
        assert!((half - Mat::from_element(2, 2, real(0.5))).norm() < 1e-15);
        let q = p_of_r(0.25).unwrap();
        let s3 = 3f64.sqrt() / 4.0;
        let expected = Mat::from_row_slice(2, 2, &[real(0.25), real(s3), real(s3), real(0.75)]);
        assert!((&q - expected).norm() < 1e-15);
        assert!((&q * &q - &q).norm() < 1e-15);
        assert!(p_of_r(0.0).is_err() && p_of_r(1.0).is_err() && p_of_r(f64::NAN).is_err());
    }

    #[test]
    fn single_square_closed_forms() {
        let (e, f) = single_square_intrinsic(0.25).unwrap();
        assert!((&e * diag_coords(1.0, 0.0) - diag_coords(0.25, 0.25)).norm() < 1e-12);
        assert!((&e * diag_coords(1.0, 1.0) - diag_coords(1.0, 1.0)).norm() < 1e-12);
        let (_, f3) = single_square_intrinsic(1.0 / 3.0).unwrap();
        assert!((&f3 * diag_coords(0.0, 1.0) - diag_coords(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-12);
        assert!((f - closed_form_f(0.25)).norm() < 1e-12);
    }

    #[test]
    fn truncations_are_alloys() {
        let fam = ProjectionFamily::new(vec![0.5, 0.25, 0.125]).unwrap();
        let tb = truncated_blend(&fam).unwrap();
        assert!(tb.verdict.is_blend && tb.verdict.is_alloy);
        assert!(tb.decomposition_residual < 1e-12);
        assert!(tb.closed_form_residual < 1e-12);
        for l in &tb.levels {
            assert!(l.sampled + 1e-9 >= l.exact);
            assert!(l.sampled <= l.exact + 1e-3);
        }
    }

    #[test]
    fn decay_examples() {
        let rows = strictness_decay(&[0.25]).unwrap();
        assert!((rows[0].witness_norm - 0.5).abs() < 1e-15);
        let harmonic = preset_sequence(Preset::Harmonic, 100);
        let rows = strictness_decay(&harmonic).unwrap();
        assert!((rows[99].witness_norm - 0.1).abs() < 1e-12);
        assert!(rows.windows(2).all(|w| w[1].k_upper <= w[0].k_upper));
        let constant = strictness_decay(&preset_sequence(Preset::Constant, 20)).unwrap();
        assert!(constant.iter().all(|r| r.k_upper == constant[0].k_upper));
        let geo = preset_sequence(Preset::Geometric, 6);
        for m in 0..6 {
            assert!((witness_norm_assembled(&geo, m) - geo[m].sqrt()).abs() < 1e-12);
        }
    }
}

//! Check suites shared by the command-line driver and the acceptance tests.
//! Every suite is deterministic in its configuration and returns a [`Ledger`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autopolar::{phi_polar_report, polar_decompose, AlgebraAutomorphism};
use crate::blendcheck::classify;
use crate::condexp::{explore_condition, hk_covariance, is_covariant, ConditionalExpectation};
use crate::crossedz2::{
    build_alloy_from_fundamental_data, build_crossed_product, canonical_alloy, concrete_formula_residuals,
    extract_fundamental_data, reconstruction_residuals, standard_expectation, swap_on_c2, FundamentalData,
};
use crate::error::Result;
use crate::intrinsic::{identity_residuals, op_residual, IntrinsicData};
use crate::jones::{
    blend_of_compacts, gns, hilbert_schmidt_bound, k_algebras, main_inequality, quasi_basis, rank_one_formula,
    FiniteCommutingSquare,
};
use crate::matalg::{real, Mat, Vect, DEFAULT_TOL};
use crate::nonstrict::{closed_form_e, closed_form_f, single_square_intrinsic, strictness_decay, truncated_blend, ProjectionFamily};
use crate::random::{blocks_for_dim, gaussian_vector, instance_rng, random_fundamental_data, random_known_polar};
use crate::report::Ledger;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub tol: f64,
    pub dims: Vec<usize>,
    pub count: usize,
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, tol: 1e-9, dims: vec![2, 4, 8], count: 50, samples: 1000 }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(crate::Error::DomainViolation(format!("tol must be positive, got {}", self.tol)));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(crate::Error::DomainViolation("dims must be a nonempty list of positive integers".into()));
        }
        Ok(())
    }

    pub fn dim_for(&self, index: usize) -> usize {
        self.dims[index % self.dims.len()]
    }
}

/// Readable name of the identity a check name refers to.
pub fn label(check: &str) -> String {
    let base = check.split('[').next().unwrap_or(check);
    let (head, tail) = base.split_once('.').unwrap_or((base, ""));
    let text = match head {
        "idempotent" => "E and F are idempotent",
        "many_rels" => "product rules for E, F and their complements",
        "joint_rel" => "joint relations between the left and right pairs",
        "phi_multiplicative" => "phi is multiplicative",
        "phi_inverse" => "phi inverse is E* + F* - id",
        "phi_e_eq_f_phi" => "phi E = F phi",
        "phi_f_eq_e_phi" => "phi F = E phi",
        "pa_phi_f_perp" => "pa = phi(a)p + F_perp(a)",
        "star_other_side" => "star conjugates of E, F, phi, Phi",
        "phi_extension" => "Phi extends phi and swaps p, q",
        "formula_for_mult" => "product from the decomposition",
        "formula_for_star" => "adjoint from the decomposition",
        "explore" => "E, F and complements written through h and phi",
        "hk_covariance" => "hk a = phi^2(a) hk",
        "covariant" => "G Phi = phi G and phi(h) = 1 - h agree",
        "alloy" => "two-point alloy verdict",
        "concrete" => "phi, E, F from fundamental data",
        "polar" => "polar decomposition of Phi",
        "extract" => "fundamental data of the alloy",
        "hk_fixed" | "h_inv_k" | "k_inv_h" | "u" | "hk_commutes" => "reconstruction of the crossed product",
        "v_eq_p_minus_h" => "kp - hq = p - h",
        "pi_eq_ad_u" => "pi is conjugation by u",
        "phi_h_eq_k" | "phi_k_eq_h" => "phi exchanges h and k",
        "rho" => "reconstruction homomorphism rho",
        "g_rho_eq_rho_h" => "G rho = rho H",
        "known_polar" => "polar parts of pi0 Ad(s)",
        "canon" => "crossed product by the swap of C^2",
        "closed_form" => "E and F of the single square",
        "decay" => "witness norms and the running bound K_N",
        "truncation" => "truncated direct sums are alloys",
        "jones" => "Jones projections",
        "quasi_basis" => "quasi-basis expansion",
        "k_algebras" => "algebras K_g, K_e, K_f",
        "compacts" => "blend of K_e and K_f in K_g",
        "main_inequality" => "sum |E(a c_i)|^2 <= |E(a*a)| |mu|",
        "rank_one" => "rank-one operators a g b*",
        "hilbert_schmidt" => "|e a f|_2 <= |E(a*a)|^{1/2}",
        _ => "",
    };
    if tail.is_empty() || text.is_empty() {
        if text.is_empty() { base.to_string() } else { text.to_string() }
    } else {
        format!("{text} ({tail})")
    }
}

fn put(ledger: &mut Ledger, suite: &str, check: &str, index: Option<usize>, residual: f64, limit: f64) {
    let name = match index {
        Some(i) => format!("{check}[{i}]"),
        None => check.to_string(),
    };
    ledger.push(suite, name, label(check), residual, limit);
}

fn put_flag(ledger: &mut Ledger, suite: &str, check: &str, index: Option<usize>, ok: bool) {
    put(ledger, suite, check, index, if ok { 0.0 } else { 1.0 }, 0.0);
}

/// Random fundamental data for instance `index`.
pub fn instance_data(cfg: &SuiteConfig, index: usize) -> Result<FundamentalData> {
    let mut rng = instance_rng(cfg.seed, index as u64);
    let blocks = blocks_for_dim(&mut rng, cfg.dim_for(index))?;
    random_fundamental_data(&mut rng, &blocks, DEFAULT_TOL)
}

fn identity_instance(ledger: &mut Ledger, cfg: &SuiteConfig, index: usize) -> Result<()> {
    const S: &str = "verify-identities";
    let fd = instance_data(cfg, index)?;
    let built = build_alloy_from_fundamental_data(&fd)?;
    let t = &built.alloy;
    let data = IntrinsicData::compute(t)?;
    for (name, r) in identity_residuals(t, &data) {
        put(ledger, S, name, Some(index), r, cfg.tol);
    }
    let g = ConditionalExpectation::from_h(t, &data, fd.h())?;
    for (name, r) in ["explore.i", "explore.ii", "explore.iii", "explore.iv"].iter().zip(explore_condition(&g)) {
        put(ledger, S, name, Some(index), r, cfg.tol);
    }
    put(ledger, S, "hk_covariance", Some(index), hk_covariance(&g), cfg.tol);
    put_flag(ledger, S, "covariant", Some(index), is_covariant(&g, &data.phi_x)?);
    Ok(())
}

/// Intrinsic identities and the h-parametrized identities on random alloys.
pub fn verify_identities(cfg: &SuiteConfig) -> Ledger {
    let mut ledger = Ledger::new();
    for i in 0..cfg.count {
        if let Err(e) = identity_instance(&mut ledger, cfg, i) {
            ledger.push_error("verify-identities", format!("instance[{i}]"), &e);
        }
    }
    ledger
}

/// Residual ledger of one round trip; `limit` applies to all reconstruction checks.
pub fn roundtrip_instance(ledger: &mut Ledger, cfg: &SuiteConfig, index: usize, limit: f64) -> Result<()> {
    const S: &str = "roundtrip";
    let fd0 = instance_data(cfg, index)?;
    let built = build_alloy_from_fundamental_data(&fd0)?;
    let t = &built.alloy;
    let verdict = classify(&t.as_quintuple()?)?;
    put_flag(ledger, S, "alloy", Some(index), verdict.is_alloy);
    let data = IntrinsicData::compute(t)?;
    for (name, r) in concrete_formula_residuals(t, &data, &fd0)? {
        put(ledger, S, &format!("concrete.{name}"), Some(index), r, limit);
    }
    let polar = phi_polar_report(t, &data)?;
    for (name, r) in &polar.residuals {
        put(ledger, S, &format!("polar.{name}"), Some(index), *r, limit);
    }
    let ex = extract_fundamental_data(t, &data)?;
    let d = t.dim_a();
    put(ledger, S, "extract.pi_involution", Some(index), op_residual(t.a(), &(ex.fd.pi().op() * ex.fd.pi().op() - Mat::identity(d, d))), limit);
    let rec = reconstruction_residuals(t, &data, &ex.fd)?;
    for (name, r) in &rec.residuals {
        put(ledger, S, name, Some(index), *r, limit);
    }
    Ok(())
}

/// Build an alloy from random `(pi, h)`, extract fundamental data back, and reconstruct the crossed product.
pub fn roundtrip(cfg: &SuiteConfig, limit: f64) -> Ledger {
    let mut ledger = Ledger::new();
    for i in 0..cfg.count {
        if let Err(e) = roundtrip_instance(&mut ledger, cfg, i, limit) {
            ledger.push_error("roundtrip", format!("instance[{i}]"), &e);
        }
    }
    ledger
}

fn polar_instance(ledger: &mut Ledger, cfg: &SuiteConfig, index: usize, limit: f64) -> Result<()> {
    const S: &str = "polar";
    let mut rng = instance_rng(cfg.seed ^ 0x5e_ed0f_901a, index as u64);
    let blocks = blocks_for_dim(&mut rng, cfg.dim_for(index))?;
    let kp = random_known_polar(&mut rng, &blocks, DEFAULT_TOL)?;
    let pd = polar_decompose(&kp.rho)?;
    put(ledger, S, "known_polar.pi", Some(index), pd.pi_part.distance(&kp.pi), limit);
    put(ledger, S, "known_polar.gamma", Some(index), pd.gamma_part.distance(&kp.gamma), limit);
    let again = polar_decompose(&pd.pi_part.compose(&pd.gamma_part))?;
    put(ledger, S, "known_polar.unique", Some(index), again.pi_part.distance(&pd.pi_part).max(again.gamma_part.distance(&pd.gamma_part)), limit);
    Ok(())
}

/// Polar decomposition of `pi0 Ad(s)` with known parts.
pub fn polar_suite(cfg: &SuiteConfig, limit: f64) -> Ledger {
    let mut ledger = Ledger::new();
    for i in 0..cfg.count {
        if let Err(e) = polar_instance(&mut ledger, cfg, i, limit) {
            ledger.push_error("polar", format!("instance[{i}]"), &e);
        }
    }
    ledger
}

fn canon_checks(ledger: &mut Ledger, limit: f64) -> Result<()> {
    const S: &str = "crossed-canon";
    let (a, pi) = swap_on_c2(DEFAULT_TOL)?;
    let pi = AlgebraAutomorphism::new(a.clone(), pi)?;
    let cp = build_crossed_product(a.clone(), &pi)?;
    let t = canonical_alloy(&cp)?;
    let data = IntrinsicData::compute(&t)?;
    let half_sum = (Mat::identity(2, 2) + pi.op()).unscale(2.0);
    put(ledger, S, "canon.phi_eq_pi", None, op_residual(&a, &(&data.phi - pi.op())), limit);
    put(ledger, S, "canon.e_eq_average", None, op_residual(&a, &(&data.e - &half_sum)), limit);
    put(ledger, S, "canon.f_eq_average", None, op_residual(&a, &(&data.f - &half_sum)), limit);
    let g = standard_expectation(&cp, &t, &data)?;
    put(ledger, S, "canon.h_eq_half", None, a.coords_norm(&(g.h() - t.a_one().unscale(2.0))), limit);
    let rules = cp.abstract_rule_residuals();
    put(ledger, S, "canon.rules", None, rules.multiplication.max(rules.adjoint), limit);
    Ok(())
}

/// The crossed product of `C^2` by the swap.
pub fn crossed_canon(limit: f64) -> Ledger {
    let mut ledger = Ledger::new();
    if let Err(e) = canon_checks(&mut ledger, limit) {
        ledger.push_error("crossed-canon", "canon", &e);
    }
    ledger
}

fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<crate::matalg::C64, R, C>>(m: &nalgebra::Matrix<crate::matalg::C64, R, C, S>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn closed_form_checks(ledger: &mut Ledger, seed: u64, samples: usize, limit: f64) -> Result<()> {
    const S: &str = "closed-forms";
    for (k, &r) in [0.1, 0.25, 0.5, 0.9].iter().enumerate() {
        let (e, f) = single_square_intrinsic(r)?;
        let mut rng = instance_rng(seed ^ 0xc105ed, k as u64);
        let (mut re, mut rf): (f64, f64) = (0.0, 0.0);
        for _ in 0..samples {
            let x = crate::random::complex_gaussian(&mut rng);
            let y = crate::random::complex_gaussian(&mut rng);
            let a = Vect::from_vec(vec![x, y]);
            let ev = real(r) * x + real(1.0 - r) * y;
            let fv = real(1.0 - r) * x + real(r) * y;
            re = re.max(max_abs(&(&e * &a - Vect::from_vec(vec![ev, ev]))));
            rf = rf.max(max_abs(&(&f * &a - Vect::from_vec(vec![fv, fv]))));
        }
        put(ledger, S, &format!("closed_form.e.r={r}"), None, re, limit);
        put(ledger, S, &format!("closed_form.f.r={r}"), None, rf, limit);
        put(ledger, S, &format!("closed_form.matrix.r={r}"), None, max_abs(&(&e - closed_form_e(r))).max(max_abs(&(&f - closed_form_f(r)))), limit);
    }
    Ok(())
}

/// `E`, `F` of the single squares against their closed forms on random diagonal elements.
pub fn closed_forms(seed: u64, samples: usize, limit: f64) -> Ledger {
    let mut ledger = Ledger::new();
    if let Err(e) = closed_form_checks(&mut ledger, seed, samples, limit) {
        ledger.push_error("closed-forms", "closed_form", &e);
    }
    ledger
}

/// Witness norms, monotonicity and the final bound of `K_N` for a sequence `r_m`.
pub fn counterexample(r_values: &[f64], limit: f64) -> Result<(Ledger, Vec<crate::nonstrict::DecayRow>)> {
    const S: &str = "counterexample";
    let rows = strictness_decay(r_values)?;
    let mut ledger = Ledger::new();
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for w in rows.windows(2) {
        monotone &= w[1].k_upper <= w[0].k_upper;
    }
    for row in &rows {
        worst = worst.max((row.witness_norm - row.sqrt_r).abs());
    }
    put(&mut ledger, S, "decay.witness_eq_sqrt_r", None, worst, limit);
    put_flag(&mut ledger, S, "decay.nonincreasing", None, monotone);
    if let Some(last) = rows.last() {
        let min_sqrt = rows.iter().map(|r| r.sqrt_r).fold(f64::INFINITY, f64::min);
        put(&mut ledger, S, "decay.final_bound", None, (last.k_upper - min_sqrt).max(0.0), limit);
        put(&mut ledger, S, "decay.exact_below_upper", None, (last.k_exact - last.k_upper).max(0.0), limit);
    }
    let open: Vec<f64> = r_values.iter().cloned().filter(|&r| r < 1.0).take(8).collect();
    if let Ok(fam) = ProjectionFamily::new(open) {
        let tb = truncated_blend(&fam)?;
        put_flag(&mut ledger, S, "truncation.alloy", None, tb.verdict.is_alloy);
        put(&mut ledger, S, "truncation.decomposition", None, tb.decomposition_residual, limit);
        put(&mut ledger, S, "truncation.closed_form", None, tb.closed_form_residual, limit);
    }
    Ok((ledger, rows))
}

fn random_c_function(rng: &mut rand_chacha::ChaCha8Rng, sq: &FiniteCommutingSquare) -> Vect {
    let mut v = Vect::zeros(sq.omega());
    for block in sq.partition_c() {
        let z = crate::random::complex_gaussian(rng);
        for &i in block {
            v[i] = z;
        }
    }
    v
}

fn square_checks(ledger: &mut Ledger, name: &str, sq: &FiniteCommutingSquare, samples: usize, seed: u64, limit: f64) -> Result<()> {
    const S: &str = "commuting-square";
    let n = sq.omega();
    let (_, jt) = gns(sq)?;
    for (k, r) in &jt.residuals {
        put(ledger, S, &format!("jones.{k}.{name}"), None, *r, limit);
    }
    let qb = quasi_basis(sq);
    put(ledger, S, &format!("quasi_basis.expansion.{name}"), None, qb.expansion_residual, limit);
    put(ledger, S, &format!("quasi_basis.resolution.{name}"), None, qb.resolution_residual, limit);
    let ks = k_algebras(sq, DEFAULT_TOL)?;
    put_flag(ledger, S, &format!("k_algebras.k_g_full.{name}"), None, ks.k_g.dim() == n * n);
    for (k, r) in &ks.residuals {
        put(ledger, S, &format!("k_algebras.{k}.{name}"), None, *r, limit);
    }
    let cb = blend_of_compacts(sq, DEFAULT_TOL)?;
    put_flag(ledger, S, &format!("compacts.blend.{name}"), None, cb.verdict.is_blend);
    put(ledger, S, &format!("compacts.membership.{name}"), None, cb.membership_residual, limit);
    put(ledger, S, &format!("compacts.b_identity.{name}"), None, cb.b_identity_residual, limit);

    let one = Vect::from_element(n, real(1.0));
    let mi = main_inequality(sq, &one, std::slice::from_ref(&one))?;
    put(ledger, S, &format!("main_inequality.saturation.{name}"), None, (mi.lhs - 1.0).abs().max((mi.rhs - 1.0).abs()), limit);
    let hs = hilbert_schmidt_bound(sq, &one);
    put(ledger, S, &format!("hilbert_schmidt.saturation.{name}"), None, (hs.hs_norm - 1.0).abs().max((hs.bound - 1.0).abs()), limit);

    let mut rng = instance_rng(seed, 0);
    let blocks_c = sq.partition_c().len();
    let (mut mi_viol, mut hs_viol, mut hs_frame, mut r1): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let a = gaussian_vector(&mut rng, n);
        let size = rng.random_range(1..=blocks_c);
        let cs: Vec<Vect> = (0..size).map(|_| random_c_function(&mut rng, sq)).collect();
        let mi = main_inequality(sq, &a, &cs)?;
        mi_viol = mi_viol.max((mi.lhs - mi.rhs) / (1.0 + mi.rhs));
        let hs = hilbert_schmidt_bound(sq, &a);
        hs_viol = hs_viol.max(hs.hs_norm - hs.bound);
        hs_frame = hs_frame.max((hs.hs_norm - hs.hs_frame).abs());
        let b = gaussian_vector(&mut rng, n);
        let eta = gaussian_vector(&mut rng, n);
        r1 = r1.max(rank_one_formula(sq, &a, &b, &eta) / (1.0 + a.norm() * b.norm() * eta.norm()));
    }
    put(ledger, S, &format!("main_inequality.samples.{name}"), None, mi_viol.max(0.0), limit);
    put(ledger, S, &format!("hilbert_schmidt.samples.{name}"), None, hs_viol.max(0.0), limit);
    put(ledger, S, &format!("hilbert_schmidt.frame.{name}"), None, hs_frame, limit);
    put(ledger, S, &format!("rank_one.samples.{name}"), None, r1, limit);
    Ok(())
}

/// Jones relations, quasi-basis, the compact blend and the sampled inequalities on one square.
pub fn commuting_square(name: &str, sq: &FiniteCommutingSquare, samples: usize, seed: u64, limit: f64) -> Ledger {
    let mut ledger = Ledger::new();
    if let Err(e) = square_checks(&mut ledger, name, sq, samples, seed, limit) {
        ledger.push_error("commuting-square", name.to_string(), &e);
    }
    ledger
}

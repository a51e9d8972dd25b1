use std::sync::Arc;

use proptest::prelude::*;

use blends_core::autopolar::{phi_polar_report, polar_decompose};
use blends_core::blendcheck::{circledast_map, classify, BlendQuintuple, Order};
use blends_core::condexp::{covariantize, explore_condition, hk_covariance, is_covariant, pimsner_popa_constant, ConditionalExpectation};
use blends_core::crossedz2::{build_alloy_from_fundamental_data, reconstruction_isomorphism, FundamentalData};
use blends_core::intrinsic::{identity_residuals, multiply_via_intrinsic, star_via_intrinsic, IntrinsicData, TwoPointAlloy};
use blends_core::jones::{blend_of_compacts, gns, product_grid, quasi_basis, FiniteCommutingSquare};
use blends_core::matalg::{
    min_hermitian_eigenvalue, numerical_rank, opnorm, real, trace_conditional_expectation, Mat, MatrixStarAlgebra,
    StarHomomorphism, C64, DEFAULT_TOL,
};
use blends_core::nonstrict::{p_of_r, strictness_decay, truncated_blend, ProjectionFamily};
use blends_core::random::{gaussian_matrix, instance_rng, random_fundamental_data, random_known_polar, random_unitary};
use blends_core::report::Ledger;
use blends_core::suites::{verify_identities, SuiteConfig};

const BLOCKS: [&[usize]; 5] = [&[1, 1], &[2], &[1, 1, 1, 1], &[2, 2], &[2, 1, 1, 1, 1]];

fn fd_for(seed: u64, shape: usize) -> FundamentalData {
    random_fundamental_data(&mut instance_rng(seed, 0), BLOCKS[shape], DEFAULT_TOL).unwrap()
}

fn alloy(fd: &FundamentalData) -> (TwoPointAlloy, IntrinsicData) {
    let t = build_alloy_from_fundamental_data(fd).unwrap().alloy;
    let d = IntrinsicData::compute(&t).unwrap();
    (t, d)
}

fn complex_matrix(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n)
        .prop_map(move |v| Mat::from_iterator(n, n, v.into_iter().map(|(re, im)| C64::new(re, im))))
}

/// Same span under the basis `b'_k = sum_j u_jk b_j`.
fn rotated(alg: &MatrixStarAlgebra, u: &Mat) -> Arc<MatrixStarAlgebra> {
    let basis: Vec<Mat> = (0..alg.dim())
        .map(|k| alg.basis().iter().enumerate().fold(Mat::zeros(alg.ambient_dim(), alg.ambient_dim()), |acc, (j, b)| acc + b * u[(j, k)]))
        .collect();
    Arc::new(MatrixStarAlgebra::with_ambient(alg.ambient_dim(), basis, alg.unital(), alg.tol()).unwrap())
}

fn rotate_hom(h: &StarHomomorphism, dom: &Arc<MatrixStarAlgebra>, cod: &Arc<MatrixStarAlgebra>) -> StarHomomorphism {
    let images: Vec<Mat> = dom.basis().iter().map(|b| h.apply(b).unwrap()).collect();
    StarHomomorphism::from_images(dom.clone(), cod.clone(), &images, h.unital()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_norm_axioms(x in complex_matrix(3), y in complex_matrix(3)) {
        let tol = 1e-10;
        prop_assert!(opnorm(&(&x * &y)) <= opnorm(&x) * opnorm(&y) + tol);
        prop_assert!((opnorm(&x.adjoint()) - opnorm(&x)).abs() <= tol * (1.0 + opnorm(&x)));
        let n = opnorm(&x);
        prop_assert!((opnorm(&(x.adjoint() * &x)) - n * n).abs() <= tol * (1.0 + n * n));
    }

    #[test]
    fn generated_algebras_are_closed(seed in any::<u64>(), n in 2usize..4, k in 1usize..3) {
        let mut rng = instance_rng(seed, 0);
        let mut gens: Vec<Mat> = (0..k).map(|_| gaussian_matrix(&mut rng, n, n)).collect();
        gens[0] = Mat::from_diagonal(&gens[0].diagonal());
        let alg = MatrixStarAlgebra::generated_by(n, &gens, true, DEFAULT_TOL).unwrap();
        prop_assert!(alg.validate().is_ok());
        for g in &gens {
            prop_assert!(alg.contains(g));
        }
    }

    #[test]
    fn trace_expectation_is_a_bimodule_map(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 1);
        let big = MatrixStarAlgebra::full_matrix(3, DEFAULT_TOL).unwrap();
        let sub = MatrixStarAlgebra::block_diagonal(&[2, 1], DEFAULT_TOL).unwrap();
        let g = trace_conditional_expectation(&sub, &big).unwrap();
        let a = sub.element(&blends_core::random::random_element(&mut rng, &sub));
        let b = sub.element(&blends_core::random::random_element(&mut rng, &sub));
        let x = gaussian_matrix(&mut rng, 3, 3);
        let lhs = sub.element(&(&g * big.project_coords(&(&a * &x * &b))));
        let rhs = &a * sub.element(&(&g * big.project_coords(&x))) * &b;
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * (1.0 + a.norm() * x.norm() * b.norm()));
    }

    #[test]
    fn blend_verdict_is_basis_free_and_ranks_agree(seed in any::<u64>(), shape in 0usize..4) {
        let fd = fd_for(seed, shape);
        let (t, _) = alloy(&fd);
        let q = t.as_quintuple().unwrap();
        let v = classify(&q).unwrap();
        prop_assert!(v.is_alloy);
        let tol = q.x().tol();
        let rij = numerical_rank(&circledast_map(&q, Order::Ij).unwrap(), tol);
        let rji = numerical_rank(&circledast_map(&q, Order::Ji).unwrap(), tol);
        prop_assert_eq!(rij, rji);

        let mut rng = instance_rng(seed, 2);
        let a2 = rotated(q.a(), &random_unitary(&mut rng, q.a().dim()));
        let b2 = rotated(q.b(), &random_unitary(&mut rng, q.b().dim()));
        let x2 = rotated(q.x(), &random_unitary(&mut rng, q.x().dim()));
        let q2 = BlendQuintuple::new(rotate_hom(&q.i, &a2, &x2), rotate_hom(&q.j, &b2, &x2)).unwrap();
        let v2 = classify(&q2).unwrap();
        prop_assert_eq!((v.is_blend, v.is_alloy, v.rank_ij, v.rank_ji), (v2.is_blend, v2.is_alloy, v2.rank_ij, v2.rank_ji));
    }

    #[test]
    fn intrinsic_identities_on_random_alloys(seed in any::<u64>(), shape in 0usize..5) {
        let (t, d) = alloy(&fd_for(seed, shape));
        for (name, r) in identity_residuals(&t, &d) {
            prop_assert!(r <= 1e-9, "{} = {:e}", name, r);
        }
        let x = t.x();
        for b1 in x.basis() {
            prop_assert!((star_via_intrinsic(&t, &d, b1).unwrap() - b1.adjoint()).norm() <= 1e-9);
            for b2 in x.basis() {
                prop_assert!((multiply_via_intrinsic(&t, &d, b1, b2).unwrap() - b1 * b2).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn expectations_from_h_satisfy_their_identities(seed in any::<u64>(), shape in 0usize..5) {
        let fd = fd_for(seed, shape);
        let (t, d) = alloy(&fd);
        let g = ConditionalExpectation::from_h(&t, &d, fd.h()).unwrap();
        for r in explore_condition(&g) {
            prop_assert!(r <= 1e-9);
        }
        prop_assert!(hk_covariance(&g) <= 1e-9);
        prop_assert!(g.residuals().values().all(|&r| r <= 1e-9), "{:?}", g.residuals());
        let herm = |m: Mat| (&m + m.adjoint()).unscale(2.0);
        prop_assert!(min_hermitian_eigenvalue(&herm(g.h_matrix())) > DEFAULT_TOL);
        prop_assert!(min_hermitian_eigenvalue(&herm(g.k_matrix())) > DEFAULT_TOL);
    }

    #[test]
    fn covariantized_expectations_are_covariant_and_faithful(seed in any::<u64>(), shape in 0usize..5) {
        let (t, d) = alloy(&fd_for(seed, shape));
        let g_hat = ConditionalExpectation::trace_induced(&t, &d).unwrap();
        let polar = phi_polar_report(&t, &d).unwrap();
        let g = covariantize(&t, &d, &g_hat, &polar.big_pi, &polar.pi_a).unwrap();
        prop_assert!(is_covariant(&g, &d.phi_x).unwrap());
        prop_assert!(pimsner_popa_constant(&g).0 > 0.0);
    }

    #[test]
    fn polar_decomposition_is_unique(seed in any::<u64>(), shape in 0usize..5) {
        let kp = random_known_polar(&mut instance_rng(seed, 4), BLOCKS[shape], DEFAULT_TOL).unwrap();
        let pd = polar_decompose(&kp.rho).unwrap();
        prop_assert!(pd.pi_part.distance(&kp.pi) <= 1e-8);
        prop_assert!(pd.gamma_part.distance(&kp.gamma) <= 1e-8);
        let again = polar_decompose(&pd.pi_part.compose(&pd.gamma_part)).unwrap();
        prop_assert!(again.pi_part.distance(&pd.pi_part) <= 1e-8);
    }

    #[test]
    fn phi_polar_report_passes_on_pipeline_alloys(seed in any::<u64>(), shape in 0usize..5) {
        let (t, d) = alloy(&fd_for(seed, shape));
        let rep = phi_polar_report(&t, &d).unwrap();
        prop_assert!(rep.max_residual() <= 1e-8, "{:?}", rep.failures(1e-8));
    }

    #[test]
    fn reconstruction_from_the_generating_data(seed in any::<u64>(), shape in 0usize..5) {
        let fd = fd_for(seed, shape);
        let (t, d) = alloy(&fd);
        let rec = reconstruction_isomorphism(&t, &d, &fd, 1e-8).unwrap();
        for key in ["hk_fixed.e", "hk_fixed.f", "phi_h_eq_k", "phi_k_eq_h", "u.unitary", "g_rho_eq_rho_h"] {
            prop_assert!(rec.residuals[key] <= 1e-8, "{} = {:e}", key, rec.residuals[key]);
        }
    }

    #[test]
    fn witness_is_root_r_on_a_log_grid(u in 0.0f64..8.0, near_one in any::<bool>()) {
        let r = if near_one { 1.0 - 10f64.powf(-u).min(0.5) } else { 10f64.powf(-u) };
        let r = r.clamp(1e-8, 1.0 - 1e-8);
        let a = Mat::from_diagonal(&blends_core::matalg::Vect::from_vec(vec![real(1.0), real(0.0)]));
        prop_assert!((opnorm(&(&a * p_of_r(r).unwrap())) - r.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn decay_is_monotone_and_bounded(mut r in prop::collection::vec(1e-6f64..0.999, 1..30)) {
        r.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let rows = strictness_decay(&r).unwrap();
        let mut min_r = f64::INFINITY;
        for (k, row) in rows.iter().enumerate() {
            min_r = min_r.min(r[k]);
            prop_assert!(row.k_upper <= min_r.sqrt() + 1e-12);
            if k > 0 {
                prop_assert!(row.k_upper <= rows[k - 1].k_upper);
            }
        }
    }

    #[test]
    fn truncations_are_alloys(r in prop::collection::vec(0.01f64..0.99, 1..5)) {
        let tb = truncated_blend(&ProjectionFamily::new(r).unwrap()).unwrap();
        prop_assert!(tb.verdict.is_blend && tb.verdict.is_alloy);
        prop_assert!(tb.decomposition_residual <= 1e-10);
    }

    #[test]
    fn product_squares_satisfy_the_jones_suite(
        u in prop::collection::vec(0.1f64..1.0, 2..4),
        v in prop::collection::vec(0.1f64..1.0, 2..4),
    ) {
        let (su, sv): (f64, f64) = (u.iter().sum(), v.iter().sum());
        let u: Vec<f64> = u.iter().map(|x| x / su).collect();
        let v: Vec<f64> = v.iter().map(|x| x / sv).collect();
        let sq: FiniteCommutingSquare = product_grid(&u, &v).unwrap();
        let (_, jt) = gns(&sq).unwrap();
        prop_assert!(jt.max_residual() <= 1e-12, "{:?}", jt.residuals);
        let w = sq.weight_matrix(1.0);
        for op in [&jt.e, &jt.f, &jt.g] {
            prop_assert!((&w * op - op.adjoint() * &w).norm() <= 1e-12);
        }
        let qb = quasi_basis(&sq);
        prop_assert!(qb.expansion_residual <= 1e-12 && qb.resolution_residual <= 1e-12);
        prop_assert!(blend_of_compacts(&sq, DEFAULT_TOL).unwrap().verdict.is_blend);
    }

    #[test]
    fn ledger_json_round_trip(entries in prop::collection::vec(("[a-z]{1,6}", "[a-z.\\[\\]0-9]{1,12}", -1e3f64..1e3), 0..20)) {
        let mut l = Ledger::new();
        for (s, c, r) in &entries {
            l.push(s, c.clone(), "label", *r, 0.5);
        }
        let text = l.to_json_lines();
        prop_assert_eq!(Ledger::from_json_lines(&text).unwrap(), l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn suite_reports_are_deterministic(seed in any::<u64>()) {
        let cfg = SuiteConfig { seed, count: 3, ..SuiteConfig::default() };
        prop_assert_eq!(verify_identities(&cfg).to_json_lines(), verify_identities(&cfg).to_json_lines());
    }
}

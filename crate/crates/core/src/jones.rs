//! Finite commuting squares of function algebras on a weighted point set, their
//! GNS space and Jones projections, and the index-finite identities.
//!
//! Functions on `Omega` are column vectors. Operators on the GNS space act on
//! those vectors; adjoints are taken for `<a, b> = sum_w w conj(a) b`, i.e.
//! `T^dag = W^-1 T^H W`. Algebras of operators are stored in the orthonormal frame
//! `T -> W^{1/2} T W^{-1/2}`, where the weighted adjoint becomes the conjugate transpose.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blendcheck::{classify, BlendQuintuple, BlendVerdict};
use crate::error::{Error, Result};
use crate::matalg::{decompose_in_basis, opnorm, real, Mat, MatrixStarAlgebra, StarHomomorphism, Vect, C64};

const WEIGHT_SUM_TOL: f64 = 1e-9;

fn block_index(omega: usize, partition: &[Vec<usize>], name: &str) -> Result<Vec<usize>> {
    let mut owner = vec![usize::MAX; omega];
    for (b, block) in partition.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::InvalidPartition(format!("{name}: block {b} is empty")));
        }
        for &i in block {
            if i >= omega {
                return Err(Error::InvalidPartition(format!("{name}: point {i} is outside 0..{omega}")));
            }
            if owner[i] != usize::MAX {
                return Err(Error::InvalidPartition(format!("{name}: point {i} appears twice")));
            }
            owner[i] = b;
        }
    }
    if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::InvalidPartition(format!("{name}: point {i} is not covered")));
    }
    Ok(owner)
}

fn averaging(weights: &[f64], partition: &[Vec<usize>]) -> Mat {
    let n = weights.len();
    let mut m = Mat::zeros(n, n);
    for block in partition {
        let total: f64 = block.iter().map(|&j| weights[j]).sum();
        for &i in block {
            for &j in block {
                m[(i, j)] = real(weights[j] / total);
            }
        }
    }
    m
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Number of classes of the finest partition coarser than both, i.e. `dim (B cap C)`.
fn meet_components(omega: usize, b: &[Vec<usize>], c: &[Vec<usize>]) -> usize {
    let mut parent: Vec<usize> = (0..omega).collect();
    for block in b.iter().chain(c.iter()) {
        for w in block.windows(2) {
            let (x, y) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[x] = y;
        }
    }
    (0..omega).filter(|&i| find(&mut parent, i) == i).count()
}

/// `(A, B, C, D)` with `A` the functions on `Omega`, `B` and `C` the functions constant
/// on the blocks of two partitions, and `D = B cap C = C 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCommutingSquare {
    omega: usize,
    weights: Vec<f64>,
    partition_b: Vec<Vec<usize>>,
    partition_c: Vec<Vec<usize>>,
    e: Mat,
    f: Mat,
}

pub fn build_square(
    omega: usize,
    weights: Vec<f64>,
    partition_b: Vec<Vec<usize>>,
    partition_c: Vec<Vec<usize>>,
) -> Result<FiniteCommutingSquare> {
    if omega == 0 {
        return Err(Error::InvalidPartition("empty point set".into()));
    }
    if weights.len() != omega {
        return Err(Error::InvalidWeights(format!("expected {omega} weights, got {}", weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {w} is not positive")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    block_index(omega, &partition_b, "B")?;
    block_index(omega, &partition_c, "C")?;
    let e = averaging(&weights, &partition_b);
    let f = averaging(&weights, &partition_c);
    let comm = (&e * &f - &f * &e).norm();
    if comm > 1e-12 * (1.0 + omega as f64) {
        return Err(Error::NotCommutingSquare(comm));
    }
    let meet = meet_components(omega, &partition_b, &partition_c);
    if meet != 1 {
        return Err(Error::MeetNotTrivial(meet));
    }
    Ok(FiniteCommutingSquare { omega, weights, partition_b, partition_c, e, f })
}

/// Row-major `rows x cols` grid; `B` is the partition into rows and `C` into columns.
pub fn grid_square(rows: usize, cols: usize, weights: Vec<f64>) -> Result<FiniteCommutingSquare> {
    let b = (0..rows).map(|r| (0..cols).map(|c| r * cols + c).collect()).collect();
    let c = (0..cols).map(|c| (0..rows).map(|r| r * cols + c).collect()).collect();
    build_square(rows * cols, weights, b, c)
}

pub fn uniform_grid(rows: usize, cols: usize) -> Result<FiniteCommutingSquare> {
    let n = rows * cols;
    grid_square(rows, cols, vec![1.0 / n as f64; n])
}

/// Grid with the product weights `w_{rc} = u_r v_c`.
pub fn product_grid(u: &[f64], v: &[f64]) -> Result<FiniteCommutingSquare> {
    let w = u.iter().flat_map(|&x| v.iter().map(move |&y| x * y)).collect();
    grid_square(u.len(), v.len(), w)
}

/// The default `2 x 3` product-weight square.
pub fn default_product_grid() -> Result<FiniteCommutingSquare> {
    product_grid(&[0.3, 0.7], &[0.2, 0.3, 0.5])
}

/// Wire form of a square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareData {
    pub omega: usize,
    pub weights: Vec<f64>,
    pub partition_b: Vec<Vec<usize>>,
    pub partition_c: Vec<Vec<usize>>,
}

impl SquareData {
    pub fn build(self) -> Result<FiniteCommutingSquare> {
        build_square(self.omega, self.weights, self.partition_b, self.partition_c)
    }
}

impl FiniteCommutingSquare {
    pub fn omega(&self) -> usize {
        self.omega
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn partition_b(&self) -> &[Vec<usize>] {
        &self.partition_b
    }

    pub fn partition_c(&self) -> &[Vec<usize>] {
        &self.partition_c
    }

    pub fn data(&self) -> SquareData {
        SquareData {
            omega: self.omega,
            weights: self.weights.clone(),
            partition_b: self.partition_b.clone(),
            partition_c: self.partition_c.clone(),
        }
    }

    /// `E: A -> B` as a matrix on function vectors.
    pub fn e_matrix(&self) -> &Mat {
        &self.e
    }

    pub fn f_matrix(&self) -> &Mat {
        &self.f
    }

    /// `G = EF` as a matrix: every row equals the weight vector.
    pub fn g_matrix(&self) -> Mat {
        Mat::from_fn(self.omega, self.omega, |_, j| real(self.weights[j]))
    }

    pub fn cond_e(&self, a: &Vect) -> Vect {
        &self.e * a
    }

    pub fn cond_f(&self, a: &Vect) -> Vect {
        &self.f * a
    }

    /// `G(a) = sum_w w a`, the state as a scalar.
    pub fn state(&self, a: &Vect) -> C64 {
        a.iter().zip(&self.weights).map(|(x, &w)| x * w).sum()
    }

    /// `<a, b> = G(a^* b)`.
    pub fn inner(&self, a: &Vect, b: &Vect) -> C64 {
        a.iter().zip(b.iter()).zip(&self.weights).map(|((x, y), &w)| x.conj() * y * w).sum()
    }

    pub fn norm(&self, a: &Vect) -> f64 {
        self.inner(a, a).re.max(0.0).sqrt()
    }

    /// Largest deviation of `c` from being constant on the blocks of `C`.
    pub fn c_residual(&self, c: &Vect) -> f64 {
        (c - &self.f * c).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn weight_matrix(&self, power: f64) -> Mat {
        Mat::from_diagonal(&Vect::from_iterator(self.omega, self.weights.iter().map(|&w| real(w.powf(power)))))
    }

    /// `T -> W^{1/2} T W^{-1/2}`.
    pub fn to_frame(&self, t: &Mat) -> Mat {
        self.weight_matrix(0.5) * t * self.weight_matrix(-0.5)
    }

    pub fn from_frame(&self, t: &Mat) -> Mat {
        self.weight_matrix(-0.5) * t * self.weight_matrix(0.5)
    }

    /// `W^-1 T^H W`.
    pub fn weighted_adjoint(&self, t: &Mat) -> Mat {
        self.weight_matrix(-1.0) * t.adjoint() * self.weight_matrix(1.0)
    }

    pub fn delta(&self, i: usize) -> Vect {
        let mut v = Vect::zeros(self.omega);
        v[i] = real(1.0);
        v
    }

    pub fn indicator(&self, block: &[usize]) -> Vect {
        let mut v = Vect::zeros(self.omega);
        for &i in block {
            v[i] = real(1.0);
        }
        v
    }

    /// Operator norm of multiplication by `a`, i.e. `max |a|`.
    pub fn sup_norm(&self, a: &Vect) -> f64 {
        a.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// The GNS space of the state: `M = A` with the weighted inner product, `xi = 1`.
#[derive(Clone, Debug)]
pub struct GnsSpace {
    pub dim: usize,
    pub xi: Vect,
    pub weights: Vec<f64>,
}

impl GnsSpace {
    /// `lambda(a)`, multiplication by `a`.
    pub fn lambda(&self, a: &Vect) -> Mat {
        Mat::from_diagonal(a)
    }
}

#[derive(Clone, Debug)]
pub struct JonesTriple {
    pub e: Mat,
    pub f: Mat,
    pub g: Mat,
    pub residuals: BTreeMap<String, f64>,
}

impl JonesTriple {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }
}

pub fn gns(sq: &FiniteCommutingSquare) -> Result<(GnsSpace, JonesTriple)> {
    let n = sq.omega;
    let space = GnsSpace { dim: n, xi: Vect::from_element(n, real(1.0)), weights: sq.weights.clone() };
    let e = sq.e.clone();
    let f = sq.f.clone();
    let g = sq.g_matrix();
    let mut r = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        r.insert(k.to_string(), v);
    };
    put("xi_unit", (sq.inner(&space.xi, &space.xi) - real(1.0)).norm());
    for (name, p) in [("e", &e), ("f", &f), ("g", &g)] {
        put(&format!("{name}.idempotent"), (p * p - p).norm());
        put(&format!("{name}.self_adjoint"), (sq.weighted_adjoint(p) - p).norm());
        put(&format!("{name}.fixes_xi"), (p * &space.xi - &space.xi).norm());
    }
    put("g_eq_ef", (&e * &f - &g).norm());
    put("g_eq_fe", (&f * &e - &g).norm());
    let (mut rg, mut re, mut rf, mut rfa) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut rip: f64 = 0.0;
    for i in 0..n {
        let a = sq.delta(i);
        let la = space.lambda(&a);
        let ga = Vect::from_element(n, sq.state(&a));
        rg = rg.max((&g * &la * &g - space.lambda(&ga) * &g).norm());
        re = re.max((&e * &la * &e - space.lambda(&sq.cond_e(&a)) * &e).norm());
        rf = rf.max((&f * &la * &f - space.lambda(&sq.cond_f(&a)) * &f).norm());
        rfa = rfa.max((&f * &la * &space.xi - sq.cond_f(&a)).norm());
        for j in 0..n {
            let b = sq.delta(j);
            let lhs = sq.inner(&a, &b);
            let rhs = sq.state(&a.map(|z| z.conj()).component_mul(&b));
            rip = rip.max((lhs - rhs).norm());
        }
    }
    put("g_lambda_g", rg);
    put("e_lambda_e", re);
    put("f_lambda_f", rf);
    put("f_a_xi", rfa);
    put("inner_is_state", rip);
    Ok((space, JonesTriple { e, f, g, residuals: r }))
}

#[derive(Clone, Debug)]
pub struct QuasiBasis {
    pub elements: Vec<Vect>,
    /// Largest `|a - sum u_i G(u_i^* a)|` over basis functions.
    pub expansion_residual: f64,
    /// `|sum u_i g u_i^* - 1|`.
    pub resolution_residual: f64,
}

/// `u_i = delta_i / sqrt(w_i)`.
pub fn quasi_basis(sq: &FiniteCommutingSquare) -> QuasiBasis {
    let n = sq.omega;
    let elements: Vec<Vect> = (0..n).map(|i| sq.delta(i).unscale(sq.weights[i].sqrt())).collect();
    let mut exp: f64 = 0.0;
    for k in 0..n {
        let a = sq.delta(k);
        let mut sum = Vect::zeros(n);
        for u in &elements {
            let coef = sq.state(&u.map(|z| z.conj()).component_mul(&a));
            sum += u * coef;
        }
        exp = exp.max((sum - a).norm());
    }
    let g = sq.g_matrix();
    let mut total = Mat::zeros(n, n);
    for u in &elements {
        total += Mat::from_diagonal(u) * &g * Mat::from_diagonal(&u.map(|z| z.conj()));
    }
    let resolution_residual = (total - Mat::identity(n, n)).norm();
    QuasiBasis { elements, expansion_residual: exp, resolution_residual }
}

/// `K_g`, `K_e` and `K_f` in the orthonormal frame, with the multiplier residuals.
#[derive(Clone, Debug)]
pub struct KAlgebras {
    pub k_g: Arc<MatrixStarAlgebra>,
    pub k_e: Arc<MatrixStarAlgebra>,
    pub k_f: Arc<MatrixStarAlgebra>,
    pub residuals: BTreeMap<String, f64>,
}

fn sandwich_span(sq: &FiniteCommutingSquare, proj: &Mat, tol: f64) -> Result<MatrixStarAlgebra> {
    let n = sq.omega;
    let mut gens = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let m = Mat::from_diagonal(&sq.delta(i)) * proj * Mat::from_diagonal(&sq.delta(j));
            if m.norm() > 0.0 {
                gens.push(sq.to_frame(&m));
            }
        }
    }
    MatrixStarAlgebra::generated_by(n, &gens, false, tol)
}

pub fn k_algebras(sq: &FiniteCommutingSquare, tol: f64) -> Result<KAlgebras> {
    let n = sq.omega;
    let k_g = Arc::new(sandwich_span(sq, &sq.g_matrix(), tol)?);
    if k_g.dim() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: k_g.dim() });
    }
    let k_e = Arc::new(sandwich_span(sq, &sq.e, tol)?);
    let k_f = Arc::new(sandwich_span(sq, &sq.f, tol)?);
    let mut residuals = BTreeMap::new();
    for (name, k) in [("k_e_k_g", &k_e), ("k_f_k_g", &k_f)] {
        let mut worst: f64 = 0.0;
        for x in k.basis() {
            for y in k_g.basis() {
                worst = worst.max(k_g.span_residual(&(x * y))).max(k_g.span_residual(&(y * x)));
            }
        }
        residuals.insert(name.to_string(), worst);
    }
    let qb = quasi_basis(sq);
    let mut total = Mat::zeros(n, n);
    let g = sq.g_matrix();
    for u in &qb.elements {
        total += sq.to_frame(&(Mat::from_diagonal(u) * &g * Mat::from_diagonal(&u.map(|z| z.conj()))));
    }
    residuals.insert("identity_in_k_g".to_string(), k_g.span_residual(&total) + (total - Mat::identity(n, n)).norm());
    Ok(KAlgebras { k_g, k_e, k_f, residuals })
}

#[derive(Clone, Debug)]
pub struct CompactBlend {
    pub verdict: BlendVerdict,
    /// Largest distance of `e lambda(a) f` from `K_g` over basis functions.
    pub membership_residual: f64,
    /// Largest `|e lambda(u) f - lambda(u) g|` over indicators `u` of the blocks of `B`.
    pub b_identity_residual: f64,
}

pub fn blend_of_compacts(sq: &FiniteCommutingSquare, tol: f64) -> Result<CompactBlend> {
    let ks = k_algebras(sq, tol)?;
    let mut membership: f64 = 0.0;
    for i in 0..sq.omega {
        let op = sq.to_frame(&(&sq.e * Mat::from_diagonal(&sq.delta(i)) * &sq.f));
        let residual = ks.k_g.span_residual(&op);
        if decompose_in_basis(&op, &ks.k_g).is_err() {
            return Err(Error::MembershipFailure { index: i, residual });
        }
        membership = membership.max(residual);
    }
    let g = sq.g_matrix();
    let mut bid: f64 = 0.0;
    for block in &sq.partition_b {
        let u = sq.indicator(block);
        let lu = Mat::from_diagonal(&u);
        bid = bid.max((&sq.e * &lu * &sq.f - &lu * &g).norm());
    }
    let i_e = StarHomomorphism::inclusion(ks.k_e.clone(), ks.k_g.clone())?;
    let i_f = StarHomomorphism::inclusion(ks.k_f.clone(), ks.k_g.clone())?;
    let verdict = classify(&BlendQuintuple::new(i_e, i_f)?)?;
    Ok(CompactBlend { verdict, membership_residual: membership, b_identity_residual: bid })
}

#[derive(Clone, Debug, Serialize)]
pub struct MainInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub gram: Vec<Vec<(f64, f64)>>,
    pub gram_norm: f64,
    pub e_norm: f64,
}

impl MainInequality {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `sum |e a c_i xi|^2` against `|E(a^* a)| |mu|` with `mu_ij = <c_i xi, c_j xi>`.
pub fn main_inequality(sq: &FiniteCommutingSquare, a: &Vect, c_list: &[Vect]) -> Result<MainInequality> {
    let tol = 1e-12;
    for c in c_list {
        let res = sq.c_residual(c);
        if res > tol * (1.0 + sq.sup_norm(c)) {
            return Err(Error::NotInC(res));
        }
    }
    let lhs: f64 = c_list.iter().map(|c| sq.norm(&sq.cond_e(&a.component_mul(c))).powi(2)).sum();
    let k = c_list.len();
    let mu = Mat::from_fn(k, k, |i, j| sq.inner(&c_list[i], &c_list[j]));
    let gram_norm = opnorm(&mu);
    let asa = a.map(|z| real(z.norm_sqr()));
    let e_norm = sq.sup_norm(&sq.cond_e(&asa));
    let gram = (0..k).map(|i| (0..k).map(|j| (mu[(i, j)].re, mu[(i, j)].im)).collect()).collect();
    Ok(MainInequality { lhs, rhs: e_norm * gram_norm, gram, gram_norm, e_norm })
}

/// `|lambda(a) g lambda(b^*) eta - G(b^* eta) a|`.
pub fn rank_one_formula(sq: &FiniteCommutingSquare, a: &Vect, b: &Vect, eta: &Vect) -> f64 {
    let g = sq.g_matrix();
    let bstar = b.map(|z| z.conj());
    let lhs = Mat::from_diagonal(a) * g * Mat::from_diagonal(&bstar) * eta;
    let coef = sq.inner(b, eta);
    (lhs - a * coef).norm()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HilbertSchmidt {
    /// From the orthonormal basis `1_C / sqrt(W_C)` of `f(M)`.
    pub hs_norm: f64,
    /// Frobenius norm in the orthonormal frame, as a cross-check.
    pub hs_frame: f64,
    pub bound: f64,
}

/// `|e lambda(a) f|_2` and `|E(a^* a)|^{1/2}`.
pub fn hilbert_schmidt_bound(sq: &FiniteCommutingSquare, a: &Vect) -> HilbertSchmidt {
    let op = &sq.e * Mat::from_diagonal(a) * &sq.f;
    let mut hs2 = 0.0;
    for block in &sq.partition_c {
        let wc: f64 = block.iter().map(|&i| sq.weights[i]).sum();
        let eta = sq.indicator(block).unscale(wc.sqrt());
        hs2 += sq.norm(&(&op * eta)).powi(2);
    }
    let asa = a.map(|z| real(z.norm_sqr()));
    HilbertSchmidt {
        hs_norm: hs2.sqrt(),
        hs_frame: sq.to_frame(&op).norm(),
        bound: sq.sup_norm(&sq.cond_e(&asa)).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::DEFAULT_TOL;

    #[test]
    fn square_validation() {
        let sq = uniform_grid(2, 2).unwrap();
        let avg = Mat::from_element(4, 4, real(0.25));
        assert!((sq.e_matrix() * sq.f_matrix() - &avg).norm() < 1e-15);
        let rows: Vec<Vec<usize>> = vec![vec![0, 1], vec![2, 3]];
        assert_eq!(build_square(4, vec![0.25; 4], rows.clone(), rows.clone()), Err(Error::MeetNotTrivial(2)));
        assert!(matches!(build_square(4, vec![0.25; 4], vec![vec![0, 1], vec![1, 2, 3]], rows.clone()), Err(Error::InvalidPartition(_))));
        assert!(matches!(build_square(4, vec![0.5; 4], rows.clone(), rows), Err(Error::InvalidWeights(_))));
        assert!(default_product_grid().is_ok());
        // non-product weights on a 2x2 grid break EF = FE
        assert!(matches!(grid_square(2, 2, vec![0.1, 0.2, 0.3, 0.4]), Err(Error::NotCommutingSquare(_))));
    }

    #[test]
    fn jones_relations_and_quasi_basis() {
        for sq in [uniform_grid(2, 2).unwrap(), default_product_grid().unwrap()] {
            let (_, jt) = gns(&sq).unwrap();
            assert!(jt.max_residual() < 1e-13, "{:?}", jt.residuals);
            let qb = quasi_basis(&sq);
            assert!(qb.expansion_residual < 1e-13 && qb.resolution_residual < 1e-13);
        }
        let qb = quasi_basis(&uniform_grid(2, 2).unwrap());
        assert!((qb.elements[0][0] - real(2.0)).norm() < 1e-15);
    }

    #[test]
    fn compacts_blend() {
        let sq = uniform_grid(2, 2).unwrap();
        let ks = k_algebras(&sq, DEFAULT_TOL).unwrap();
        assert_eq!(ks.k_g.dim(), 16);
        assert_eq!(ks.k_e.dim(), 8);
        let cb = blend_of_compacts(&sq, DEFAULT_TOL).unwrap();
        assert!(cb.verdict.is_blend);
        assert!(cb.membership_residual < 1e-12 && cb.b_identity_residual < 1e-14);
    }

    #[test]
    fn saturation_at_unit() {
        let sq = default_product_grid().unwrap();
        let one = Vect::from_element(6, real(1.0));
        let mi = main_inequality(&sq, &one, std::slice::from_ref(&one)).unwrap();
        assert!((mi.lhs - 1.0).abs() < 1e-14 && (mi.rhs - 1.0).abs() < 1e-14);
        let hs = hilbert_schmidt_bound(&sq, &one);
        assert!((hs.hs_norm - 1.0).abs() < 1e-14 && (hs.bound - 1.0).abs() < 1e-14);
        assert!((hs.hs_frame - 1.0).abs() < 1e-14);
        assert!(rank_one_formula(&sq, &one, &one, &one) < 1e-15);
        assert!(matches!(main_inequality(&sq, &one, &[sq.delta(0)]), Err(Error::NotInC(_))));
    }

    #[test]
    fn one_point_closed_form() {
        let sq = default_product_grid().unwrap();
        // point 4 = row 1, column 1: w = 0.7 * 0.3, W_B = 0.7, W_C = 0.3
        let w = sq.weights()[4];
        let hs = hilbert_schmidt_bound(&sq, &sq.delta(4));
        assert!((hs.hs_norm.powi(2) - w * w / (0.7 * 0.3)).abs() < 1e-14);
        assert!((hs.bound.powi(2) - w / 0.7).abs() < 1e-14);
    }
}

//! Finite-dimensional *-algebras realized as spans of complex matrices.
//!
//! Every algebra in the crate lives inside some ambient `M_n(C)` and is stored
//! through an ordered basis. Elements are handled either as ambient matrices
//! or as coordinate vectors over that basis; linear maps between algebras are
//! coefficient matrices acting on coordinates.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// Dense complex matrix; the ambient representation of every element.
pub type Mat = DMatrix<C64>;
/// Coordinate vector over an algebra basis.
pub type Vect = DVector<C64>;

/// Default relative tolerance for membership and identity checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Residual bound `tol * (1 + scale)` used by every invariant check.
#[inline]
pub fn bound(tol: f64, scale: f64) -> f64 {
    tol * (1.0 + scale)
}

pub fn vectorize(x: &Mat) -> Vect {
    Vect::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &Vect, n: usize) -> Mat {
    Mat::from_column_slice(n, n, v.as_slice())
}

pub fn singular_values(m: &Mat) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    m.singular_values()
}

/// Largest singular value, for any shape. Internal shorthand for [`operator_norm`].
pub fn opnorm(x: &Mat) -> f64 {
    singular_values(x).iter().cloned().fold(0.0, f64::max)
}

/// Operator (spectral) norm of a square matrix.
pub fn operator_norm(x: &Mat) -> Result<f64> {
    if !x.is_square() {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    Ok(opnorm(x))
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank(m: &Mat, tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

pub fn hermitian_residual(x: &Mat) -> f64 {
    (x - x.adjoint()).norm()
}

/// Sorted spectrum of the hermitian part of `x`.
pub fn hermitian_spectrum(x: &Mat) -> Vec<f64> {
    let herm = (x + x.adjoint()).unscale(2.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_hermitian_eigenvalue(x: &Mat) -> f64 {
    hermitian_spectrum(x).first().cloned().unwrap_or(0.0)
}

/// `U diag(lambda^exponent) U*` for a hermitian `x = U diag(lambda) U*`.
///
/// Negative exponents require the spectrum to stay above `tol`; positive
/// exponents tolerate eigenvalues down to `-tol (1 + |x|)`, which are clamped to zero.
pub fn psd_functional_calculus(x: &Mat, exponent: f64, tol: f64) -> Result<Mat> {
    if !x.is_square() {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    let scale = x.norm();
    let herm_res = hermitian_residual(x);
    if herm_res > bound(tol, scale) {
        return Err(Error::NotHermitian(herm_res));
    }
    let eig = SymmetricEigen::new((x + x.adjoint()).unscale(2.0));
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if exponent < 0.0 && lmin <= tol {
        return Err(Error::NotPositive(lmin));
    }
    if exponent > 0.0 && lmin < -bound(tol, scale) {
        return Err(Error::NotPositive(lmin));
    }
    let powered = eig.eigenvalues.map(|l| real(l.max(0.0).powf(exponent)));
    let u = &eig.eigenvectors;
    let out = u * Mat::from_diagonal(&powered) * u.adjoint();
    Ok((&out + out.adjoint()).unscale(2.0))
}

/// Orthonormal (Frobenius) basis of the span of `elems`, discarding singular
/// values below `tol * sigma_max`.
fn orthonormal_span(n: usize, elems: &[Mat], tol: f64) -> Vec<Mat> {
    if elems.is_empty() {
        return Vec::new();
    }
    let mut stacked = Mat::zeros(n * n, elems.len());
    for (k, e) in elems.iter().enumerate() {
        stacked.set_column(k, &vectorize(e));
    }
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Vec::new();
    }
    // nalgebra does not sort singular values; keep a deterministic order by magnitude.
    let mut keep: Vec<(usize, f64)> = svd
        .singular_values
        .iter()
        .cloned()
        .enumerate()
        .filter(|&(_, s)| s > tol * top)
        .collect();
    keep.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    keep.iter().map(|&(k, _)| unvectorize(&u.column(k).into_owned(), n)).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ClosureReport {
    pub independence: f64,
    pub multiplication: f64,
    pub adjoint: f64,
    pub identity: f64,
}

/// A *-subalgebra of `M_n(C)` given by an ordered, linearly independent basis.
#[derive(Clone, Debug)]
pub struct MatrixStarAlgebra {
    ambient_dim: usize,
    basis: Vec<Mat>,
    unital: bool,
    tol: f64,
    frame: Mat,
    pinv: Mat,
    star: Mat,
    identity: Option<Vect>,
    closure: ClosureReport,
}

impl MatrixStarAlgebra {
    /// Builds the algebra and checks independence, multiplicative closure,
    /// adjoint closure and (if `unital`) that the identity lies in the span.
    pub fn new(basis: Vec<Mat>, unital: bool, tol: f64) -> Result<Self> {
        let n = match basis.first() {
            Some(b) => b.nrows(),
            None => return Err(Error::DimensionMismatch { expected: 1, found: 0 }),
        };
        Self::with_ambient(n, basis, unital, tol)
    }

    /// Like [`MatrixStarAlgebra::new`] but accepts an empty basis (the zero algebra).
    pub fn with_ambient(n: usize, basis: Vec<Mat>, unital: bool, tol: f64) -> Result<Self> {
        for b in &basis {
            if !b.is_square() {
                return Err(Error::NotSquare { rows: b.nrows(), cols: b.ncols() });
            }
            if b.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
            }
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let d = basis.len();
        let mut frame = Mat::zeros(n * n, d);
        for (k, b) in basis.iter().enumerate() {
            frame.set_column(k, &vectorize(b));
        }
        let (pinv, independence) = if d == 0 {
            (Mat::zeros(0, n * n), f64::INFINITY)
        } else {
            let sv = frame.singular_values();
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            let smax = sv.iter().cloned().fold(0.0, f64::max);
            if smin <= tol * smax.max(1.0) {
                return Err(Error::DependentBasis(smin));
            }
            let pinv = frame
                .clone()
                .pseudo_inverse(0.5 * smin)
                .map_err(|_| Error::DependentBasis(smin))?;
            (pinv, smin)
        };
        let mut alg = MatrixStarAlgebra {
            ambient_dim: n,
            basis,
            unital,
            tol,
            frame,
            pinv,
            star: Mat::zeros(d, d),
            identity: None,
            closure: ClosureReport { independence, ..Default::default() },
        };
        let mut adjoint_res: f64 = 0.0;
        for k in 0..d {
            let adj = alg.basis[k].adjoint();
            let (coords, res) = alg.least_squares(&adj);
            let limit = bound(tol, adj.norm());
            if res > limit {
                return Err(Error::NotClosed { what: "adjoints", residual: res });
            }
            adjoint_res = adjoint_res.max(res);
            alg.star.set_column(k, &coords);
        }
        let mut mult_res: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let prod = &alg.basis[i] * &alg.basis[j];
                let (_, res) = alg.least_squares(&prod);
                if res > bound(tol, prod.norm()) {
                    return Err(Error::NotClosed { what: "products", residual: res });
                }
                mult_res = mult_res.max(res);
            }
        }
        let mut id_res = 0.0;
        if unital {
            let one = Mat::identity(n, n);
            let (coords, res) = alg.least_squares(&one);
            if d == 0 || res > bound(tol, one.norm()) {
                return Err(Error::MissingIdentity);
            }
            id_res = res;
            alg.identity = Some(coords);
        }
        alg.closure.multiplication = mult_res;
        alg.closure.adjoint = adjoint_res;
        alg.closure.identity = id_res;
        Ok(alg)
    }

    /// Smallest *-closed, multiplicatively closed span containing `gens`
    /// (and the identity when `unital`).
    pub fn generated_by(n: usize, gens: &[Mat], unital: bool, tol: f64) -> Result<Self> {
        let mut seed: Vec<Mat> = Vec::with_capacity(gens.len() + 1);
        if unital {
            seed.push(Mat::identity(n, n));
        }
        for g in gens {
            if !g.is_square() {
                return Err(Error::NotSquare { rows: g.nrows(), cols: g.ncols() });
            }
            if g.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: g.nrows() });
            }
            seed.push(g.clone());
        }
        let mut basis = orthonormal_span(n, &seed, tol);
        loop {
            let mut candidates = basis.clone();
            candidates.extend(basis.iter().map(|b| b.adjoint()));
            for x in &basis {
                for y in &basis {
                    candidates.push(x * y);
                }
            }
            let next = orthonormal_span(n, &candidates, tol);
            if next.len() == basis.len() {
                break;
            }
            basis = next;
        }
        Self::with_ambient(n, basis, unital, tol)
    }

    /// All of `M_n(C)` with the matrix-unit basis `E_11, E_21, ..., E_nn` (column-major).
    pub fn full_matrix(n: usize, tol: f64) -> Result<Self> {
        Self::block_diagonal(&[n], tol)
    }

    /// Diagonal matrices with the basis `E_11, ..., E_nn`.
    pub fn diagonal(n: usize, tol: f64) -> Result<Self> {
        Self::block_diagonal(&vec![1; n], tol)
    }

    /// `M_{k1} + ... + M_{kr}` embedded block-diagonally, with matrix-unit basis.
    pub fn block_diagonal(sizes: &[usize], tol: f64) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        let mut basis = Vec::new();
        let mut offset = 0;
        for &k in sizes {
            for col in 0..k {
                for row in 0..k {
                    let mut e = Mat::zeros(n, n);
                    e[(offset + row, offset + col)] = real(1.0);
                    basis.push(e);
                }
            }
            offset += k;
        }
        Self::with_ambient(n, basis, true, tol)
    }

    /// Multiples of the identity in `M_n(C)`.
    pub fn scalars(n: usize, tol: f64) -> Result<Self> {
        Self::with_ambient(n, vec![Mat::identity(n, n)], true, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn unital(&self) -> bool {
        self.unital
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn closure_report(&self) -> ClosureReport {
        self.closure
    }

    /// Coordinates of the identity, when unital.
    pub fn identity_coords(&self) -> Option<&Vect> {
        self.identity.as_ref()
    }

    pub fn one(&self) -> Mat {
        Mat::identity(self.ambient_dim, self.ambient_dim)
    }

    pub fn zero_coords(&self) -> Vect {
        Vect::zeros(self.dim())
    }

    /// Coordinate vector of the `k`-th basis element.
    pub fn unit_coords(&self, k: usize) -> Vect {
        let mut v = self.zero_coords();
        v[k] = real(1.0);
        v
    }

    /// Matrix whose `k`-th column holds the coordinates of `b_k^*`.
    pub fn star_matrix(&self) -> &Mat {
        &self.star
    }

    fn least_squares(&self, x: &Mat) -> (Vect, f64) {
        let v = vectorize(x);
        let coords = &self.pinv * &v;
        let res = (&v - &self.frame * &coords).norm();
        (coords, res)
    }

    /// Least-squares coordinates without a membership check; this is the
    /// trace-orthogonal projection onto the span.
    pub fn project_coords(&self, x: &Mat) -> Vect {
        self.least_squares(x).0
    }

    /// Coordinates of `x`, failing with `NotInSpan` if the residual exceeds
    /// `tol (1 + |x|)`.
    pub fn try_coords(&self, x: &Mat) -> Result<Vect> {
        if x.nrows() != self.ambient_dim || x.ncols() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: x.nrows() });
        }
        let (coords, res) = self.least_squares(x);
        let limit = bound(self.tol, x.norm());
        if res > limit {
            return Err(Error::NotInSpan { residual: res, bound: limit });
        }
        Ok(coords)
    }

    pub fn span_residual(&self, x: &Mat) -> f64 {
        self.least_squares(x).1
    }

    pub fn contains(&self, x: &Mat) -> bool {
        self.try_coords(x).is_ok()
    }

    pub fn element(&self, c: &Vect) -> Mat {
        unvectorize(&(&self.frame * c), self.ambient_dim)
    }

    pub fn mul_coords(&self, c1: &Vect, c2: &Vect) -> Vect {
        self.project_coords(&(self.element(c1) * self.element(c2)))
    }

    /// Coordinates of `x^*` given coordinates of `x`.
    pub fn star_coords(&self, c: &Vect) -> Vect {
        &self.star * c.conjugate()
    }

    /// Coordinate matrix of `f^*: x -> f(x^*)^*` for a linear `f` on this algebra.
    pub fn star_conjugate_map(&self, f: &Mat) -> Mat {
        &self.star * f.conjugate() * self.star.conjugate()
    }

    /// Frobenius size of the element with coordinates `c`.
    pub fn coords_norm(&self, c: &Vect) -> f64 {
        (&self.frame * c).norm()
    }

    /// Re-run the closure invariants.
    pub fn validate(&self) -> Result<ClosureReport> {
        let re = Self::with_ambient(self.ambient_dim, self.basis.clone(), self.unital, self.tol)?;
        Ok(re.closure)
    }
}

/// Least-squares coordinates of `x` with membership asserted.
pub fn decompose_in_basis(x: &Mat, alg: &MatrixStarAlgebra) -> Result<Vect> {
    alg.try_coords(x)
}

pub fn algebra_generated_by(n: usize, gens: &[Mat], unital: bool, tol: f64) -> Result<MatrixStarAlgebra> {
    MatrixStarAlgebra::generated_by(n, gens, unital, tol)
}

/// Trace-orthogonal projection of `ambient` onto `sub`, as a coefficient matrix
/// (`dim sub` x `dim ambient`). The bimodule law and the identity on `sub` are
/// checked on all basis elements before returning.
pub fn trace_conditional_expectation(sub: &MatrixStarAlgebra, ambient: &MatrixStarAlgebra) -> Result<Mat> {
    if sub.ambient_dim() != ambient.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: ambient.ambient_dim(), found: sub.ambient_dim() });
    }
    let tol = sub.tol().max(ambient.tol());
    let mut sub_in_x = Mat::zeros(ambient.dim(), sub.dim());
    for (k, b) in sub.basis().iter().enumerate() {
        sub_in_x.set_column(k, &ambient.try_coords(b)?);
    }
    let mut g = Mat::zeros(sub.dim(), ambient.dim());
    for (k, x) in ambient.basis().iter().enumerate() {
        g.set_column(k, &sub.project_coords(x));
    }
    let ident = (&g * &sub_in_x - Mat::identity(sub.dim(), sub.dim())).norm();
    if ident > bound(tol, 1.0) {
        return Err(Error::BimoduleViolation(ident));
    }
    let mut worst: f64 = 0.0;
    for a in sub.basis() {
        for b in sub.basis() {
            for (k, x) in ambient.basis().iter().enumerate() {
                let lhs = sub.element(&(&g * ambient.project_coords(&(a * x * b))));
                let rhs = a * sub.element(&g.column(k).into_owned()) * b;
                let res = (&lhs - &rhs).norm();
                if res > bound(tol, rhs.norm()) {
                    return Err(Error::BimoduleViolation(res));
                }
                worst = worst.max(res);
            }
        }
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct HomResiduals {
    pub multiplicative: f64,
    pub star: f64,
    pub unit: f64,
}

/// A *-homomorphism between two matrix algebras, stored as the coefficient
/// matrix sending domain coordinates to codomain coordinates.
#[derive(Clone, Debug)]
pub struct StarHomomorphism {
    domain: Arc<MatrixStarAlgebra>,
    codomain: Arc<MatrixStarAlgebra>,
    coeff: Mat,
    unital: bool,
}

impl StarHomomorphism {
    pub fn new(
        domain: Arc<MatrixStarAlgebra>,
        codomain: Arc<MatrixStarAlgebra>,
        coeff: Mat,
        unital: bool,
    ) -> Result<Self> {
        let hom = Self::new_unchecked(domain, codomain, coeff, unital)?;
        hom.validate()?;
        Ok(hom)
    }

    /// Builds the map without checking multiplicativity or adjoints; only shapes are verified.
    pub fn new_unchecked(
        domain: Arc<MatrixStarAlgebra>,
        codomain: Arc<MatrixStarAlgebra>,
        coeff: Mat,
        unital: bool,
    ) -> Result<Self> {
        if coeff.nrows() != codomain.dim() {
            return Err(Error::DimensionMismatch { expected: codomain.dim(), found: coeff.nrows() });
        }
        if coeff.ncols() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), found: coeff.ncols() });
        }
        Ok(StarHomomorphism { domain, codomain, coeff, unital })
    }

    /// The map determined by the images of the domain basis.
    pub fn from_images(
        domain: Arc<MatrixStarAlgebra>,
        codomain: Arc<MatrixStarAlgebra>,
        images: &[Mat],
        unital: bool,
    ) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), found: images.len() });
        }
        let mut coeff = Mat::zeros(codomain.dim(), domain.dim());
        for (k, img) in images.iter().enumerate() {
            coeff.set_column(k, &codomain.try_coords(img)?);
        }
        Self::new(domain, codomain, coeff, unital)
    }

    /// Inclusion of a subalgebra sharing the same ambient space.
    pub fn inclusion(sub: Arc<MatrixStarAlgebra>, sup: Arc<MatrixStarAlgebra>) -> Result<Self> {
        let images = sub.basis().to_vec();
        let unital = sub.unital() && sup.unital();
        Self::from_images(sub, sup, &images, unital)
    }

    pub fn identity(alg: Arc<MatrixStarAlgebra>) -> Self {
        let d = alg.dim();
        let unital = alg.unital();
        StarHomomorphism { domain: alg.clone(), codomain: alg, coeff: Mat::identity(d, d), unital }
    }

    pub fn domain(&self) -> &Arc<MatrixStarAlgebra> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<MatrixStarAlgebra> {
        &self.codomain
    }

    pub fn coeff(&self) -> &Mat {
        &self.coeff
    }

    pub fn unital(&self) -> bool {
        self.unital
    }

    pub fn apply_coords(&self, c: &Vect) -> Vect {
        &self.coeff * c
    }

    /// Image of the domain element with coordinates `c`, as an ambient matrix.
    pub fn image_of(&self, c: &Vect) -> Mat {
        self.codomain.element(&self.apply_coords(c))
    }

    pub fn apply(&self, x: &Mat) -> Result<Mat> {
        Ok(self.image_of(&self.domain.try_coords(x)?))
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.coeff, self.codomain.tol())
    }

    /// Maximal residuals of the homomorphism laws over basis pairs.
    pub fn residuals(&self) -> HomResiduals {
        let dom = &self.domain;
        let d = dom.dim();
        let mut out = HomResiduals::default();
        for i in 0..d {
            let ei = dom.unit_coords(i);
            let xi = self.image_of(&ei);
            for j in 0..d {
                let ej = dom.unit_coords(j);
                let lhs = self.image_of(&dom.mul_coords(&ei, &ej));
                let rhs = &xi * self.image_of(&ej);
                out.multiplicative = out.multiplicative.max((lhs - rhs).norm());
            }
            let star_img = self.image_of(&dom.star_coords(&ei));
            out.star = out.star.max((star_img - xi.adjoint()).norm());
        }
        if self.unital {
            out.unit = match dom.identity_coords() {
                Some(one) => (self.image_of(one) - self.codomain.one()).norm(),
                None => f64::INFINITY,
            };
        }
        out
    }

    pub fn validate(&self) -> Result<HomResiduals> {
        let tol = self.codomain.tol().max(self.domain.tol());
        let scale = opnorm(&self.coeff);
        let r = self.residuals();
        if r.multiplicative > bound(tol, scale * scale) {
            return Err(Error::MultiplicativityViolation(r.multiplicative));
        }
        if r.star > bound(tol, scale) {
            return Err(Error::NotStarPreserving(r.star));
        }
        if r.unit > bound(tol, scale) {
            return Err(Error::NotUnital(r.unit));
        }
        Ok(r)
    }
}

/// Wire form of a matrix: `{"rows", "cols", "re", "im"}` with row-major nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Mat> for MatrixJson {
    fn from(m: &Mat) -> Self {
        let re = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect();
        MatrixJson { rows: m.nrows(), cols: m.ncols(), re, im }
    }
}

impl TryFrom<MatrixJson> for Mat {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Mat> {
        if j.re.len() != j.rows || j.im.len() != j.rows {
            return Err(Error::DimensionMismatch { expected: j.rows, found: j.re.len().min(j.im.len()) });
        }
        let mut m = Mat::zeros(j.rows, j.cols);
        for i in 0..j.rows {
            if j.re[i].len() != j.cols || j.im[i].len() != j.cols {
                return Err(Error::DimensionMismatch { expected: j.cols, found: j.re[i].len() });
            }
            for k in 0..j.cols {
                let z = C64::new(j.re[i][k], j.im[i][k]);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite);
                }
                m[(i, k)] = z;
            }
        }
        Ok(m)
    }
}

/// Wire form of an algebra: `{"ambient_dim", "unital", "tol", "basis"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub ambient_dim: usize,
    pub unital: bool,
    pub tol: f64,
    pub basis: Vec<MatrixJson>,
}

impl From<&MatrixStarAlgebra> for AlgebraJson {
    fn from(a: &MatrixStarAlgebra) -> Self {
        AlgebraJson {
            ambient_dim: a.ambient_dim(),
            unital: a.unital(),
            tol: a.tol(),
            basis: a.basis().iter().map(MatrixJson::from).collect(),
        }
    }
}

impl TryFrom<AlgebraJson> for MatrixStarAlgebra {
    type Error = Error;

    fn try_from(j: AlgebraJson) -> Result<Self> {
        let basis = j.basis.into_iter().map(Mat::try_from).collect::<Result<Vec<_>>>()?;
        MatrixStarAlgebra::with_ambient(j.ambient_dim, basis, j.unital, j.tol)
    }
}

pub fn matrix_to_json(m: &Mat) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix json serialization")
}

pub fn matrix_from_json(s: &str) -> Result<Mat> {
    Mat::try_from(serde_json::from_str::<MatrixJson>(s)?)
}

pub fn algebra_to_json(a: &MatrixStarAlgebra) -> String {
    serde_json::to_string(&AlgebraJson::from(a)).expect("algebra json serialization")
}

pub fn algebra_from_json(s: &str) -> Result<MatrixStarAlgebra> {
    MatrixStarAlgebra::try_from(serde_json::from_str::<AlgebraJson>(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(entries: &[f64]) -> Mat {
        Mat::from_diagonal(&Vect::from_iterator(entries.len(), entries.iter().map(|&x| real(x))))
    }

    fn p_of(r: f64) -> Mat {
        let s = (r - r * r).sqrt();
        Mat::from_row_slice(2, 2, &[real(r), real(s), real(s), real(1.0 - r)])
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&Mat::identity(3, 3)).unwrap() - 1.0).abs() < 1e-14);
        assert!((operator_norm(&diag(&[2.0, -1.0])).unwrap() - 2.0).abs() < 1e-14);
        // p(1/4) is a projection; its spectrum is {0, 1}.
        assert!((operator_norm(&p_of(0.25)).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(operator_norm(&Mat::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn decompose_identity_first() {
        let one = Mat::identity(2, 2);
        let alg = MatrixStarAlgebra::new(vec![one.clone(), diag(&[1.0, -1.0])], true, DEFAULT_TOL).unwrap();
        let c = decompose_in_basis(&one, &alg).unwrap();
        assert!((c[0] - real(1.0)).norm() < 1e-14);
        assert!(c[1].norm() < 1e-14);
    }

    #[test]
    fn decompose_p_half_in_two_element_basis() {
        // basis {I, J/2} with J the all-ones matrix; p(1/2) = J/2 exactly.
        let half_j = Mat::from_element(2, 2, real(0.5));
        let alg = MatrixStarAlgebra::new(vec![Mat::identity(2, 2), half_j], true, DEFAULT_TOL).unwrap();
        let c = decompose_in_basis(&p_of(0.5), &alg).unwrap();
        assert!(c[0].norm() < 1e-14);
        assert!((c[1] - real(1.0)).norm() < 1e-14);
    }

    #[test]
    fn off_diagonal_not_in_diagonal_algebra() {
        let alg = MatrixStarAlgebra::diagonal(2, DEFAULT_TOL).unwrap();
        let mut x = Mat::zeros(2, 2);
        x[(0, 1)] = real(1.0);
        assert!(matches!(decompose_in_basis(&x, &alg), Err(Error::NotInSpan { .. })));
    }

    #[test]
    fn generated_by_examples() {
        let r = 0.3;
        let p = p_of(r);
        let q = Mat::identity(2, 2) - &p;
        let b = algebra_generated_by(2, &[p, q], true, DEFAULT_TOL).unwrap();
        assert_eq!(b.dim(), 2);

        let scalars = algebra_generated_by(3, &[], true, DEFAULT_TOL).unwrap();
        assert_eq!(scalars.dim(), 1);

        let mut e12 = Mat::zeros(2, 2);
        e12[(0, 1)] = real(1.0);
        let m2 = algebra_generated_by(2, &[e12], false, DEFAULT_TOL).unwrap();
        assert_eq!(m2.dim(), 4);
        assert!(m2.contains(&Mat::identity(2, 2)));
        m2.validate().unwrap();
    }

    #[test]
    fn non_closed_span_rejected() {
        let mut e12 = Mat::zeros(2, 2);
        e12[(0, 1)] = real(1.0);
        let err = MatrixStarAlgebra::new(vec![Mat::identity(2, 2), e12], true, DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, Error::NotClosed { .. }));
    }

    #[test]
    fn trace_expectation_examples() {
        let m2 = MatrixStarAlgebra::full_matrix(2, DEFAULT_TOL).unwrap();
        let g = trace_conditional_expectation(&m2, &m2).unwrap();
        assert!((g - Mat::identity(4, 4)).norm() < 1e-12);

        let d2 = MatrixStarAlgebra::diagonal(2, DEFAULT_TOL).unwrap();
        let g = trace_conditional_expectation(&d2, &m2).unwrap();
        let x = Mat::from_row_slice(2, 2, &[real(1.0), real(2.0), real(3.0), real(4.0)]);
        let gx = d2.element(&(&g * m2.try_coords(&x).unwrap()));
        assert!((gx - diag(&[1.0, 4.0])).norm() < 1e-12);

        let m3 = MatrixStarAlgebra::full_matrix(3, DEFAULT_TOL).unwrap();
        let s3 = MatrixStarAlgebra::scalars(3, DEFAULT_TOL).unwrap();
        let g = trace_conditional_expectation(&s3, &m3).unwrap();
        let x = Mat::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let gx = s3.element(&(&g * m3.try_coords(&x).unwrap()));
        let expected = Mat::identity(3, 3) * (x.trace() / real(3.0));
        assert!((gx - expected).norm() < 1e-12);
    }

    #[test]
    fn functional_calculus_examples() {
        let id = Mat::identity(2, 2);
        assert!((psd_functional_calculus(&id, 0.5, DEFAULT_TOL).unwrap() - &id).norm() < 1e-14);
        let inv_sqrt = psd_functional_calculus(&diag(&[4.0, 9.0]), -0.5, DEFAULT_TOL).unwrap();
        assert!((inv_sqrt - diag(&[0.5, 1.0 / 3.0])).norm() < 1e-14);

        let t = 0.25;
        let hk = diag(&[t * (1.0 - t), (1.0 - t) * t]);
        let root = psd_functional_calculus(&hk, 0.5, DEFAULT_TOL).unwrap();
        assert!((&root * &root - &hk).norm() < 1e-14);

        let inv = psd_functional_calculus(&diag(&[2.0, 0.5]), -1.0, DEFAULT_TOL).unwrap();
        assert!((inv - diag(&[0.5, 2.0])).norm() < 1e-14);

        assert!(matches!(
            psd_functional_calculus(&diag(&[1.0, 0.0]), -0.5, DEFAULT_TOL),
            Err(Error::NotPositive(_))
        ));
        let mut nh = Mat::identity(2, 2);
        nh[(0, 1)] = real(1.0);
        assert!(matches!(psd_functional_calculus(&nh, 0.5, DEFAULT_TOL), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = Mat::from_fn(2, 3, |i, j| C64::new(0.1 * (i as f64) + 1.0 / 3.0, (j as f64).sqrt() - 0.7));
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        assert_eq!(m, back);

        let alg = MatrixStarAlgebra::block_diagonal(&[2, 1], DEFAULT_TOL).unwrap();
        let back = algebra_from_json(&algebra_to_json(&alg)).unwrap();
        assert_eq!(back.basis(), alg.basis());
        assert_eq!(back.unital(), alg.unital());
    }

    #[test]
    fn inclusion_and_broken_homomorphism() {
        let d2 = Arc::new(MatrixStarAlgebra::diagonal(2, DEFAULT_TOL).unwrap());
        let m2 = Arc::new(MatrixStarAlgebra::full_matrix(2, DEFAULT_TOL).unwrap());
        let inc = StarHomomorphism::inclusion(d2.clone(), m2.clone()).unwrap();
        assert_eq!(inc.rank(), 2);
        // sending both units to the identity is linear and unital but not multiplicative
        let images = vec![Mat::identity(2, 2), Mat::identity(2, 2)];
        let err = StarHomomorphism::from_images(d2, m2, &images, false).unwrap_err();
        assert!(matches!(err, Error::MultiplicativityViolation(_)));
    }
}

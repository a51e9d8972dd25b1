//! Blend, alloy and morphism checks for quintuples `(A, B, i, j, X)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matalg::{bound, numerical_rank, Mat, MatrixStarAlgebra, StarHomomorphism};

/// Two homomorphisms `i: A -> X` and `j: B -> X` into a common algebra.
#[derive(Clone, Debug)]
pub struct BlendQuintuple {
    pub i: StarHomomorphism,
    pub j: StarHomomorphism,
}

impl BlendQuintuple {
    pub fn new(i: StarHomomorphism, j: StarHomomorphism) -> Result<Self> {
        let xi = i.codomain();
        let xj = j.codomain();
        if !Arc::ptr_eq(xi, xj) && xi.basis() != xj.basis() {
            return Err(Error::DimensionMismatch { expected: xi.dim(), found: xj.dim() });
        }
        i.validate()?;
        j.validate()?;
        Ok(BlendQuintuple { i, j })
    }

    pub fn a(&self) -> &Arc<MatrixStarAlgebra> {
        self.i.domain()
    }

    pub fn b(&self) -> &Arc<MatrixStarAlgebra> {
        self.j.domain()
    }

    pub fn x(&self) -> &Arc<MatrixStarAlgebra> {
        self.i.codomain()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    /// `a (x) b -> i(a) j(b)`, columns indexed by `k * dim B + l`.
    Ij,
    /// `b (x) a -> j(b) i(a)`, columns indexed by `l * dim A + k`.
    Ji,
}

/// Matrix of the product map on the tensor basis, in X-coordinates.
pub fn circledast_map(q: &BlendQuintuple, order: Order) -> Result<Mat> {
    let (a, b, x) = (q.a(), q.b(), q.x());
    let ia: Vec<Mat> = (0..a.dim()).map(|k| q.i.image_of(&a.unit_coords(k))).collect();
    let jb: Vec<Mat> = (0..b.dim()).map(|l| q.j.image_of(&b.unit_coords(l))).collect();
    let mut out = Mat::zeros(x.dim(), a.dim() * b.dim());
    for (k, ik) in ia.iter().enumerate() {
        for (l, jl) in jb.iter().enumerate() {
            let (prod, col) = match order {
                Order::Ij => (ik * jl, k * b.dim() + l),
                Order::Ji => (jl * ik, l * a.dim() + k),
            };
            let coords = x.try_coords(&prod).map_err(|e| match e {
                Error::NotInSpan { residual, .. } => Error::NotInX(residual),
                other => other,
            })?;
            out.set_column(col, &coords);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlendVerdict {
    pub is_blend: bool,
    pub is_alloy: bool,
    pub is_strict: bool,
    pub rank_ij: usize,
    pub rank_ji: usize,
    pub dim_x: usize,
    pub dim_a_tensor_b: usize,
    pub note: String,
}

pub fn classify(q: &BlendQuintuple) -> Result<BlendVerdict> {
    let tol = q.x().tol();
    let rank_ij = numerical_rank(&circledast_map(q, Order::Ij)?, tol);
    let rank_ji = numerical_rank(&circledast_map(q, Order::Ji)?, tol);
    let dim_x = q.x().dim();
    let dim_a_tensor_b = q.a().dim() * q.b().dim();
    let is_blend = rank_ij == dim_x && rank_ji == dim_x;
    let is_alloy = is_blend && rank_ij == dim_a_tensor_b && rank_ji == dim_a_tensor_b;
    Ok(BlendVerdict {
        is_blend,
        is_alloy,
        is_strict: is_blend,
        rank_ij,
        rank_ji,
        dim_x,
        dim_a_tensor_b,
        note: "finite dimension: dense range equals full range, so strict coincides with blend".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorphismReport {
    pub intertwine_i: f64,
    pub intertwine_j: f64,
    pub rank: usize,
    pub is_isomorphism: bool,
    /// Whether the source is a blend and the target an alloy.
    pub rigidity_applies: bool,
    /// False only when rigidity applies and the map is not bijective.
    pub rigidity_holds: bool,
}

/// Checks `phi i1 = i2` and `phi j1 = j2`; when `q1` is a blend and `q2` an
/// alloy, also reports whether `phi` is bijective.
pub fn check_morphism(q1: &BlendQuintuple, q2: &BlendQuintuple, phi: &StarHomomorphism) -> Result<MorphismReport> {
    if q1.a().basis() != q2.a().basis() || q1.b().basis() != q2.b().basis() {
        return Err(Error::DimensionMismatch { expected: q1.a().dim(), found: q2.a().dim() });
    }
    if phi.domain().basis() != q1.x().basis() || phi.codomain().basis() != q2.x().basis() {
        return Err(Error::DimensionMismatch { expected: q1.x().dim(), found: phi.domain().dim() });
    }
    let tol = q2.x().tol();
    let residual = |h1: &StarHomomorphism, h2: &StarHomomorphism| -> f64 {
        let dom = h1.domain();
        (0..dom.dim())
            .map(|k| {
                let e = dom.unit_coords(k);
                let via = phi.image_of(&h1.apply_coords(&e));
                (via - h2.image_of(&e)).norm()
            })
            .fold(0.0, f64::max)
    };
    let intertwine_i = residual(&q1.i, &q2.i);
    let intertwine_j = residual(&q1.j, &q2.j);
    let worst = intertwine_i.max(intertwine_j);
    if worst > bound(tol, 1.0) {
        return Err(Error::IntertwiningViolation(worst));
    }
    let rank = phi.rank();
    let is_isomorphism = rank == phi.domain().dim() && rank == phi.codomain().dim();
    let v1 = classify(q1)?;
    let v2 = classify(q2)?;
    let rigidity_applies = v1.is_blend && v2.is_alloy;
    Ok(MorphismReport {
        intertwine_i,
        intertwine_j,
        rank,
        is_isomorphism,
        rigidity_applies,
        rigidity_holds: !rigidity_applies || is_isomorphism,
    })
}

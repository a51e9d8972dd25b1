use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("element is not in the span (residual {residual:.3e} > bound {bound:.3e})")]
    NotInSpan { residual: f64, bound: f64 },

    #[error("basis is linearly dependent (smallest singular value {0:.3e})")]
    DependentBasis(f64),

    #[error("span is not closed under {what} (residual {residual:.3e})")]
    NotClosed { what: &'static str, residual: f64 },

    #[error("algebra is flagged unital but does not contain the identity")]
    MissingIdentity,

    #[error("map is not multiplicative (residual {0:.3e})")]
    MultiplicativityViolation(f64),

    #[error("map does not preserve adjoints (residual {0:.3e})")]
    NotStarPreserving(f64),

    #[error("map does not preserve the unit (residual {0:.3e})")]
    NotUnital(f64),

    #[error("matrix is not hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("map is not a bimodule map over the subalgebra (residual {0:.3e})")]
    BimoduleViolation(f64),

    #[error("product i(a)j(b) does not lie in X (residual {0:.3e})")]
    NotInX(f64),

    #[error("map does not intertwine the embeddings (residual {0:.3e})")]
    IntertwiningViolation(f64),

    #[error("(a, b) -> ap + bq is not bijective (rank {rank}, expected {expected})")]
    SingularDecomposition { rank: usize, expected: usize },

    #[error("element is not a projection (residual {0:.3e})")]
    NotProjection(f64),

    #[error("h violates ha = phi(a)h + F_perp(a) (residual {0:.3e})")]
    HConditionViolation(f64),

    #[error("covariance tests disagree: G Phi = Phi G gives {commutes}, phi(h) = 1 - h gives {fixed}")]
    EquivalenceMismatch { commutes: bool, fixed: bool },

    #[error("conditional expectation is not faithful (alpha = {0:.3e})")]
    NotFaithful(f64),

    #[error("operator has an eigenvalue with non-positive real part ({0:.3e})")]
    SpectrumOnCut(f64),

    #[error("square root failed on both the Schur and Newton routes (residual {0:.3e})")]
    DefectiveOperator(f64),

    #[error("automorphism is not positive (residual {0:.3e})")]
    NotPositiveAutomorphism(f64),

    #[error("operator is not invertible (smallest singular value {0:.3e})")]
    NotInvertible(f64),

    #[error("automorphism is not an involution (residual {0:.3e})")]
    NotInvolutive(f64),

    #[error("automorphism is not a *-automorphism (residual {0:.3e})")]
    NotStarAutomorphism(f64),

    #[error("invalid fundamental data: {0}")]
    InvalidFundamentalData(String),

    #[error("value outside its domain: {0}")]
    DomainViolation(String),

    #[error("expectations do not commute, |EF - FE| = {0:.3e}")]
    NotCommutingSquare(f64),

    #[error("B and C intersect in a {0}-dimensional algebra, expected the scalars")]
    MeetNotTrivial(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("e lambda(a) f is not in K_g for basis element {index} (residual {residual:.3e})")]
    MembershipFailure { index: usize, residual: f64 },

    #[error("function is not constant on the blocks of C (residual {0:.3e})")]
    NotInC(f64),

    #[error("check `{name}` failed (residual {residual:.3e})")]
    CheckFailed { name: String, residual: f64 },

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

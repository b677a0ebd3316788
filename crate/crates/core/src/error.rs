use thiserror::Error;

use crate::lie::ModelKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model mismatch: {0:?} vs {1:?}")]
    ModelMismatch(ModelKind, ModelKind),
    #[error("element is not in p (residual {0:.3e})")]
    NotInP(f64),
    #[error("element is not in the algebra (residual {0:.3e})")]
    NotInAlgebra(f64),
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("invalid Cartan subalgebra: {0}")]
    InvalidCartan(String),
    #[error("degenerate root: <beta, A> vanishes on the whole basis")]
    DegenerateRoot,
    #[error("Iwasawa decomposition requires a noncompact model, got {0:?}")]
    CompactModel(ModelKind),
    #[error("invalid normal direction: {0}")]
    InvalidXi(String),
    #[error("group membership violated (residual {0:.3e})")]
    NotInGroup(f64),
    #[error("invalid leaf label: {0}")]
    InvalidLabel(String),
    #[error("vector is not tangent (residual {0:.3e})")]
    NotTangent(f64),
    #[error("square root failed: {0}")]
    SqrtFailure(String),
    #[error("rank-deficient chart at the requested point (min singular value {0:.3e})")]
    RankDeficient(f64),
    #[error("surface chart has the wrong model for this operation: {0}")]
    WrongSurfaceModel(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error("surface spec error: {0}")]
    Spec(String),
    #[error("sampling plan rejected {rejected} of {total} samples as near-singular")]
    SamplingPlan { rejected: usize, total: usize },
    #[error("finite-difference stencil leaves the chart domain")]
    StencilOutsideDomain,
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants are shared across modules so that pipelines can propagate
/// failures from the numeric kernel without re-wrapping.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("matrix is singular (pivot {pivot:e} below threshold)")]
    Singular { pivot: f64 },
    #[error("resolvent I - {lambda}A is singular at step {step}")]
    SingularResolvent { lambda: f64, step: usize },
    #[error("norm {norm:e} exceeds the matrix exponential guard {max:e}")]
    NormTooLarge { norm: f64, max: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cone is not pointed: it contains a line")]
    NotPointed,
    #[error("cone is not a lattice cone (not simplicial)")]
    NotLattice,
    #[error("cone is not generating: no majorant exists")]
    NotGenerating,
    #[error("the functional set is empty")]
    EmptyPhi,
    #[error("vector is not an order unit of the cone")]
    NotOrderUnit,

    #[error("half-norm precondition failed: {0}")]
    VariantPreconditionFailed(String),
    #[error("operation unsupported for half-norm variant {0}")]
    VariantUnsupported(String),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("linear program is infeasible: {0}")]
    Infeasible(String),
    #[error("subdifferential is empty")]
    EmptySubdifferential,

    #[error("operator domain is empty")]
    EmptyDomain,
    #[error("point is outside the operator domain (violation {violation:e})")]
    NotInDomain { violation: f64 },

    #[error("functional is not representable by a nonnegative measure (residual {residual:e})")]
    NotRepresentable { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

use thiserror::Error;

/// Errors raised by state construction, decompositions and condition checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("a state needs at least one party")]
    EmptyDims,

    #[error("party {party} has dimension zero")]
    ZeroDimension { party: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("vectors are not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("the zero state has no decomposition")]
    ZeroState,

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("numerically ambiguous degenerate cluster: {0}")]
    NumericalAmbiguity(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("residual factors are not proportional (|overlap| = {overlap:.6})")]
    NotProportional { overlap: f64 },

    #[error("{terms} terms exceed the bound min(dims) = {bound}")]
    TooManyTerms { terms: usize, bound: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

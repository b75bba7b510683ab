use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AtlasError {
    #[error("parameter is not finite")]
    NonFiniteParameter,
    #[error("parameter {0} lies outside the region U")]
    OutsideDomain(String),
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),
    #[error("no cycle found within the iteration budget")]
    NoCycleFound,
    #[error("period cap exceeded ({0} > 64)")]
    PeriodCapExceeded(usize),
    #[error("periodic refinement did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("derivative of F^p(z) - z is singular")]
    DerivativeSingular,
    #[error("critical orbit hit a pole")]
    OrbitHitPole,
    #[error("no root in range: {0}")]
    NoRootInRange(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("bisection failed: {0}")]
    BisectionFailed(String),
    #[error("refinement diverged: {0}")]
    RefinementDiverged(String),
    #[error("point is not in the attracting petal")]
    NotInPetal,
    #[error("iteration depth exhausted")]
    DepthExhausted,
    #[error("cusp reached")]
    CuspReached,
    #[error("continuation stalled: {0}")]
    ContinuationStalled(String),
    #[error("parameter lies inside the tricorn component")]
    NotEscaping,
    #[error("split fixed points not found: {0}")]
    SplitPointsNotFound(String),
    #[error("seeding failed: found {0} boundary points")]
    SeedingFailed(usize),
    #[error("ambiguous root/co-root tag at {0}")]
    AmbiguousTag(String),
    #[error("tile key out of world: {0}")]
    OutOfWorld(String),
    #[error("unknown figure {id}; valid ids: {valid}")]
    UnknownFigure { id: String, valid: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for AtlasError {
    fn from(e: std::io::Error) -> Self {
        AtlasError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AtlasError>;

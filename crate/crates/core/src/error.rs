use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("{0} is not a prime")]
    InvalidPrime(u64),
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("radius must be closed in every variable (variable {0} is {1})")]
    NotClosed(usize, &'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("affine tail bound cannot be certified to stay above the truncated minimum")]
    TailDominates,
    #[error("operation requires tail-free (finite) series")]
    TailUnsupported,
    #[error("tail bounds are not pointwise-min combinable: {0}")]
    IncompatibleTails(String),
    #[error("cannot realize coefficients: {0}")]
    Realization(String),
    #[error("space mixes open and dagger quantifiers; membership is not decided for it")]
    MixedQuantifiers,
    #[error("invalid system config: {0}")]
    InvalidConfig(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),
    #[error("missing tail envelope on the {0} side")]
    MissingEnvelope(&'static str),
    #[error("invalid exhaustion: {0}")]
    InvalidExhaustion(String),
    #[error("invalid annulus: {0}")]
    InvalidAnnulus(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

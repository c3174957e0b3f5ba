use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("horizon must be nonnegative, got {0}")]
    NegativeHorizon(f64),
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("no particle to the left of {0}")]
    NoLeftParticle(f64),
    #[error("no particle to the right of {0}")]
    NoRightParticle(f64),
    #[error("position {0} coincides with an existing position")]
    PositionCollision(f64),
    #[error("position {position} lies outside the domain [{start}, {end})")]
    OutOfDomain { position: f64, start: f64, end: f64 },
    #[error("positions are not strictly increasing at index {0}")]
    NotSorted(usize),
    #[error("point times are not strictly increasing at index {0}")]
    TimesNotSorted(usize),
    #[error("operands live on different geometries")]
    GeometryMismatch,
    #[error("unstable cyclic queue: {services} services for {arrivals} arrivals")]
    UnstableQueue { arrivals: usize, services: usize },
    #[error("line {0} is not contained in line {next}", next = .0 + 1)]
    NotNested(usize),
    #[error("classes {0} and {1} share a position")]
    NotDisjoint(usize, usize),
    #[error("class {0} has no particles")]
    EmptyClass(usize),
    #[error("no second class particle at the origin")]
    NoOriginParticle,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("the two queue recursions disagree at system {0}")]
    RecursionMismatch(usize),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

/// Errors across the crate. Domain violations name the bound they break.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("table overflow: {n} cars do not fit on {m} places (need n < m)")]
    TableOverflow { m: usize, n: usize },

    #[error("try {place} for car {car} out of range 1..={m}")]
    TryOutOfRange { car: usize, place: usize, m: usize },

    #[error("checkpoints must be strictly increasing and < m")]
    BadCheckpoints,

    #[error("phi domain: requires 1 <= k <= n <= m - 2, got m={m}, n={n}, k={k}")]
    PhiDomain { m: usize, n: usize, k: usize },

    #[error("joint birth law: block sizes must be >= 1 and sum to at most n")]
    JointLawDomain,

    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("largest-block CDF restricted to x > 1/4 (got x={0}); use the Monte Carlo estimate instead")]
    CdfRangeTooDeep(f64),

    #[error("quadrature did not converge to tolerance {tol} (residual {residual})")]
    QuadratureDiverged { tol: f64, residual: f64 },

    #[error("merge probability needs at least 2 empty places, got l={0}")]
    TooFewEmpties(usize),

    #[error("conditioning acceptance rate {rate} below 1e-3 ({accepted}/{attempts} accepted)")]
    ConditioningTooRare {
        rate: f64,
        accepted: usize,
        attempts: usize,
    },

    #[error("scheme is not confined: {0}")]
    NotConfined(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid forest: {0}")]
    InvalidForest(String),

    #[error("lattice path must be circular for this operation")]
    NotCircular,

    #[error("lattice resolution must be >= 2, got {0}")]
    BadResolution(usize),

    #[error("lambda grid must be strictly increasing and nonnegative")]
    BadLambdaGrid,

    #[error("lambda * sqrt(m) = {0} exceeds m; no arrival index exists")]
    LambdaTooLarge(f64),

    #[error("path has only {found} excursions at this resolution, need {need}")]
    TooFewExcursions { need: usize, found: usize },

    #[error("ran out of sampling points after selecting {selected} of {need} excursions")]
    SamplingExhausted { need: usize, selected: usize },

    #[error("path has no strictly positive value; nothing to sample")]
    FlatPath,

    #[error("empty sample")]
    EmptySample,

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

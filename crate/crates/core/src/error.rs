use thiserror::Error;

/// Errors produced by the checkers, the dynamics stack and the IO layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("site count {0} is outside the supported range 1..=6")]
    SiteCount(usize),
    #[error("mismatched site counts: {0} vs {1}")]
    SiteMismatch(usize, usize),
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("duplicate site {0} in flip set")]
    DuplicateSite(usize),
    #[error("configuration mask {mask} out of range for {n} sites")]
    ConfigOutOfRange { mask: u64, n: usize },
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("negative weight at configuration {0}")]
    NegativeWeight(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("total mass is zero")]
    ZeroTotal,
    #[error("weights sum to {0}, not 1")]
    NotNormalized(String),
    #[error("conditioning event has probability zero")]
    ZeroProbabilityEvent,
    #[error("tilt function must be strictly positive (index {0})")]
    NonPositiveTilt(usize),
    #[error("function is not increasing: f({lower}) > f({upper})")]
    NotIncreasing { lower: String, upper: String },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("negative rate for site {site} at configuration {config}")]
    NegativeRate { site: usize, config: usize },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("rates are not independent of the configuration at site {0}")]
    NotIndependentFlips(usize),
    #[error("malformed functional: {0}")]
    MalformedFunctional(String),
    #[error("precondition unmet: {0}")]
    Precondition(String),
    #[error("tilt sampler produced an invalid function: {0}")]
    InvalidTilt(String),
    #[error("unintended verdicts: {0}")]
    UnintendedVerdicts(String),
    #[error("invalid rational literal {0:?}")]
    ParseRational(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

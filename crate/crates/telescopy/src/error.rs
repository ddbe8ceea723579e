use thiserror::Error;

/// Errors produced by state construction, measurement evaluation, yield
/// computation, and optimization.
#[derive(Debug, Error)]
pub enum Error {
    #[error("telescope count must be at least 2, got {0}")]
    TooFewTelescopes(usize),

    #[error("mean photon number must lie in (0, 1), got {0}")]
    EpsilonRange(f64),

    #[error("coherence magnitude |g| must not exceed 1, got {0} for pair {1}")]
    CoherenceBound(f64, String),

    #[error("expected {expected} pair entries for {m} telescopes, got {got}")]
    PairArity { m: usize, expected: usize, got: usize },

    #[error("measurement strength tau must lie in {range}, got {tau}")]
    TauRange { tau: f64, range: &'static str },

    #[error("schedule must contain at least one round")]
    EmptySchedule,

    #[error("outcome vector has probability below 1e-300; impossible on the truncated state")]
    ImpossibleOutcome,

    #[error("dimension mismatch: operator is {op} but state is {state}")]
    DimensionMismatch { op: usize, state: usize },

    #[error("source intensity is not normalized: weight sum {0}")]
    UnnormalizedSource(f64),

    #[error("source intensity has a negative sample: {0}")]
    NegativeIntensity(f64),

    #[error("telescope array has no baselines")]
    MissingBaselines,

    #[error("scheme {0} requires a distillation yield")]
    MissingYield(&'static str),

    #[error("scheme {0} has no POVM builder; its outcome distribution is constructed directly")]
    NoPovmBuilder(&'static str),

    #[error("the all-pairs bipartite scheme requires an even telescope count, got {0}")]
    OddTelescopeCount(usize),

    #[error("phase specification does not match scheme/telescope count: {0}")]
    PhaseArity(String),

    #[error("Fisher matrices are not blockwise proportional: residual {0:.3e}")]
    NotProportional(f64),

    #[error("regime constraint infeasible for epsilon = {0}")]
    InfeasibleRegime(f64),

    #[error("sample count must be at least 1")]
    NoSamples,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the solvers and the problem-file loader.
#[derive(Debug, Error)]
pub enum Error {
    #[error("divergence: non-finite value at t={t}")]
    Divergence { t: f64 },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty partition")]
    EmptyPartition,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("coefficient evaluation failure: {name} at (t={t}, s={s})")]
    CoefficientEvaluation { name: String, t: f64, s: f64 },

    #[error("s={0} is outside the horizon")]
    OutOfHorizon(f64),

    #[error("invalid terminal weight: h({t}) = {value}")]
    InvalidTerminalWeight { t: f64, value: f64 },

    #[error("riccati divergence at t={t}")]
    RiccatiDivergence { t: f64 },

    #[error("control weight singular at s={s} (min eigenvalue {min_eigenvalue:e})")]
    ControlWeightSingular { s: f64, min_eigenvalue: f64 },

    #[error("incompatible sampling: {0}")]
    IncompatibleSampling(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("invalid span: s={s} precedes t={t}")]
    InvalidSpan { t: f64, s: f64 },

    #[error("invalid order: tau={tau} must exceed t={t}")]
    InvalidOrder { t: f64, tau: f64 },

    #[error("not time-consistent input: {0}")]
    NotTimeConsistent(String),

    #[error("problem file: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("gap requires problem_c")]
    GapRequiresProblemC,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

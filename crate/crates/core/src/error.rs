use thiserror::Error;

/// Errors produced by the risk-measure toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),

    #[error("level {value} outside {expected}")]
    LevelOutOfRange { value: f64, expected: &'static str },

    #[error("order must be a positive integer, got {0}")]
    InvalidOrder(i64),

    #[error("tolerance {value:e} outside [{min:e}, {max:e}]")]
    ToleranceOutOfRange { value: f64, min: f64, max: f64 },

    #[error("x = {x} lies below the excess threshold u = {threshold}; the model is defined only above it")]
    ExcessGpdBelowThreshold { x: f64, threshold: f64 },

    #[error("level {p} does not exceed F_X(u) = {base}")]
    ExcessGpdLevelBelowBase { p: f64, base: f64 },

    #[error("no closed form for {family} with order {order}")]
    NoClosedForm { family: &'static str, order: u32 },

    #[error("{family} has no finite first moment for these parameters")]
    NoFirstMoment { family: &'static str },

    #[error("quadrature did not converge after {nodes} nodes (last estimate {estimate}); the quantile function may not be integrable")]
    QuadratureNonConvergence { nodes: usize, estimate: f64 },

    #[error("ES_n(0) - VaR(1-eps) = {excess} > 0 although the PELVE existence check passed; retry with a tighter rel_tol")]
    BracketFailure { excess: f64 },

    #[error("PELVE depends on the base distribution below the threshold (eps = {epsilon})")]
    PelveUndetermined { epsilon: f64 },

    #[error("alpha must exceed 1, got {0}")]
    AlphaOutOfRange(f64),

    #[error("kappa must exceed -1, got {0}")]
    KappaOutOfRange(f64),

    #[error("sampling is not supported for {0}")]
    SamplingUnsupported(&'static str),

    #[error("sample must be non-empty")]
    EmptySample,

    #[error("sample contains a non-finite value at index {0}")]
    NonFiniteSample(usize),

    #[error("no finite PELVE estimates to bin")]
    NoFiniteEstimates,

    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, RiskError>;

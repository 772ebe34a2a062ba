use thiserror::Error;

/// Errors raised by the analytic and stochastic engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("operation requires the boundary parameter u")]
    MissingBoundaryParam,

    #[error("problem too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("objective is not finite anywhere on ({lower}, {upper}]")]
    NonFinite { lower: f64, upper: f64 },

    #[error("direction (s, t) = ({s}, {t}) lies in the flat edge t >= s(1-p)/p")]
    FlatRegime { s: f64, t: f64 },

    #[error("xi = {xi} is outside the finite domain (threshold {threshold})")]
    DomainError { xi: f64, threshold: f64 },

    #[error("sampled functions live on incompatible grids: {0}")]
    GridMismatch(String),

    #[error("simulation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("malformed environment dump: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::OutOfRange {
        name,
        value,
        expected,
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid curvature profile: {0}")]
    InvalidProfile(String),

    #[error("{name} = {value} is outside the admissible domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("marginal mismatch: {0}")]
    Marginals(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            value,
            reason: reason.into(),
        }
    }
}

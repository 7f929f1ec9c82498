use thiserror::Error;

/// Errors produced by the quadrature engines, the integrand catalog and the
/// verification chain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),

    #[error("unknown closed form `{0}`")]
    UnknownClosedForm(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("unknown chain step `{0}`")]
    UnknownStep(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("tolerances must be positive and finite (abs = {abs}, rel = {rel})")]
    InvalidTolerance { abs: f64, rel: f64 },

    #[error("integrand returned non-finite value {value} at {point:?}")]
    EvaluationFailure { point: Vec<f64>, value: f64 },

    #[error("entry `{entry}` expects {expected} coordinate(s), got {got}")]
    WrongArity {
        entry: String,
        expected: usize,
        got: usize,
    },

    #[error("point {point:?} lies outside the open domain of `{entry}`")]
    DomainViolation { entry: String, point: Vec<f64> },

    #[error("entry `{entry}`: {message}")]
    Parameter { entry: String, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Monte Carlo rejected {rejected} of {drawn} samples (rate limit 1e-6)")]
    RejectionRate { rejected: u64, drawn: u64 },

    #[error("step selection is empty")]
    EmptySelection,

    #[error("step `{step}`: {source}")]
    Step {
        step: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Validation outcomes (hypothesis checks, certification verdicts) are
/// returned as reports, not through this type. Only genuine failures to run
/// an operation end up here.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("delay too large: tau = {tau} must be below {rule} = {threshold}")]
    DelayTooLarge { tau: f64, threshold: f64, rule: &'static str },

    #[error("numerical blowup at t = {t}")]
    Blowup { t: f64 },

    #[error("time {t} outside [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("Petrov condition violated at {point:?}: best inner product {value} > -mu = {neg_mu}")]
    PetrovViolation {
        point: Vec<f64>,
        value: f64,
        neg_mu: f64,
    },

    #[error("steering certification failed: {reason}")]
    SteeringFailure {
        reason: String,
        log: crate::steering::SteeringLog,
    },

    #[error("search budget exceeded: {cells} cells requested, limit {limit}")]
    Budget { cells: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

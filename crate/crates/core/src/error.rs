use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("t={t} outside trajectory range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("step budget exhausted at t={t}")]
    StepBudget { t: f64 },
    #[error("bracket [{lo}, {hi}] does not straddle the dichotomy")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("far-field condition never satisfied: {0}")]
    HorizonExhausted(String),
    #[error("no solution: {0}")]
    Nonexistence(String),
    #[error("parameter outside supported regime: {0}")]
    Regime(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not found: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

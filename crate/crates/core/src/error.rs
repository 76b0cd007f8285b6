use thiserror::Error;

use crate::motion::MotionTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parameter {t} lies outside the open domain ({lo}, {hi})")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("denominator vanishes at t = {t}")]
    Pole { t: String },

    #[error("denominator of coordinate {coord} has a real root inside the domain")]
    PoleInDomain { coord: usize },

    #[error("curve cannot supply derivatives of order {requested} (max {supported})")]
    JetOrder { requested: usize, supported: usize },

    #[error("parametrization is singular near t = {t} (speed {speed:e})")]
    SingularParametrization { t: f64, speed: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("scheme not applicable: {0}")]
    SchemeMismatch(String),

    #[error("exact arithmetic unavailable: {0}")]
    ExactnessUnavailable(String),

    #[error("need at least 3 samples with strictly increasing N, got {0}")]
    InsufficientSamples(usize),

    #[error("resultant vanishes identically: {0}")]
    DegenerateParametrization(String),

    #[error("rigidity function is singular at tau = {tau} (factor {factor:e})")]
    SingularH { tau: f64, factor: f64 },

    #[error("Newton continuation diverged at step {step}")]
    NewtonDivergence { step: usize, partial: Box<MotionTrace> },

    #[error("motion left the curve domain at step {step}")]
    DomainExit { step: usize, partial: Box<MotionTrace> },

    #[error("framework is disconnected: vertex {vertex} is unreachable from the driver")]
    DisconnectedFramework { vertex: usize },

    #[error("finite-difference step too small for order {order}: estimates do not converge")]
    StepTooSmall { order: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Errors that carry partially computed results.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            Error::NewtonDivergence { .. }
                | Error::DomainExit { .. }
                | Error::SingularH { .. }
                | Error::StepTooSmall { .. }
                | Error::SingularParametrization { .. }
        )
    }
}

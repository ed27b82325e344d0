use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole at z = {z}: {which} has a vanishing denominator")]
    PoleAtZ { z: Complex64, which: &'static str },

    #[error("normalized distance is undefined at the origin")]
    OriginInput,

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("root iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("quadrature budget exhausted: value {value}, error bound {error}")]
    BudgetExceeded { value: f64, error: f64 },

    #[error("transversality fails at radius {radius} (angle {angle})")]
    TransversalityFailure { radius: f64, angle: f64 },

    #[error("level homotopy stalled at level {level}")]
    HomotopyStall { level: f64 },

    #[error("arguments span an arc of length {span}, more than the allowed {allowed}")]
    BadSector { span: f64, allowed: f64 },

    #[error("region is unbounded")]
    Unbounded,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed polynomial description: {0}")]
    Schema(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

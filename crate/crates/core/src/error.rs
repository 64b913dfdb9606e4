use thiserror::Error;

/// Errors raised by the dynamics and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on an input value was violated.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A non-finite value appeared in a computation.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Probability reached the momentum grid edges.
    #[error("momentum truncation: {edge_probability:e} probability in the outer grid band")]
    Truncation { edge_probability: f64 },

    /// The norm of a quantum state drifted beyond the allowed tolerance.
    #[error("norm drift {drift:e} after kick {kick}")]
    NormDrift { drift: f64, kick: usize },

    /// The inputs are valid individually but the requested quantity does not exist.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

use thiserror::Error;

/// Errors raised by body, density and pipeline operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular linear map (|det| = {det:e})")]
    Singular { det: f64 },

    #[error("no closed-form polar for {0} bodies")]
    NoClosedFormPolar(&'static str),

    #[error("point lies outside the body (gauge {gauge})")]
    OutsideBody { gauge: f64 },

    #[error("inner body is not contained in the outer body (excess {excess:e})")]
    NotContained { excess: f64 },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("zero total mass")]
    ZeroMass,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("sampler acceptance collapsed ({acceptance:e}) and hit-and-run is disabled")]
    AcceptanceCollapse { acceptance: f64 },

    #[error("linear program is unbounded")]
    Unbounded,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or configuration parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The phase limit is never reached along the requested azimuth.
    #[error("tracking boundary unbounded at altitude {altitude} m, azimuth {phi_deg} deg")]
    Unbounded { altitude: f64, phi_deg: f64 },

    #[error("calibration needs at least one sample")]
    EmptyCalibration,

    /// A runtime invariant was broken during simulation.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mixer is singular: yaw-moment coefficient d must be nonzero")]
    SingularMixer,

    #[error("collective thrust {thrust} N is at or below the minimum {min} N")]
    ThrustTooLow { thrust: f64, min: f64 },

    #[error("attitude is too close to a singular projection (|cos product| = {value})")]
    NearSingularAttitude { value: f64 },

    #[error("roll inversion amplitude {amplitude} is degenerate")]
    DegenerateProjection { amplitude: f64 },

    #[error("simulation diverged at t = {t} s")]
    Diverged { t: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

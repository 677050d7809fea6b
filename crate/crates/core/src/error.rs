use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("site separation dx = {dx} m is below the ball radius {radius} m; the displaced copies would overlap")]
    OverlappingSites { dx: f64, radius: f64 },

    #[error("site amplitudes are not normalized: |alpha|^2 + |beta|^2 = {norm}")]
    NotNormalized { norm: f64 },

    #[error("step control gives {steps} steps per transit, at least {min} required")]
    TooFewSteps { steps: usize, min: usize },

    #[error("detector report `{0}` has no detected particles")]
    EmptyReport(&'static str),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
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

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain of a formula (singular point, invalid field).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set violates a construction invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The linear drift has an eigenvalue with non-negative real part.
    #[error("fluctuations not stationary: {0}")]
    Unstable(String),

    /// A stability inequality of the inversion-free model is violated.
    #[error("stability condition violated: {inequality} (value {value:.6e})")]
    Stability { inequality: &'static str, value: f64 },

    /// The semiclassical amplitude equation has no admissible fixed point.
    #[error("no steady state: {0}")]
    NoSteadyState(String),

    #[error("spectral resolution insufficient: segment {segment:.4e} s < required {required:.4e} s")]
    SpectralResolution { segment: f64, required: f64 },

    /// An iterative oracle did not settle within its horizon.
    #[error("no convergence after t = {t_max:.4e} (residual {residual:.3e})")]
    NoConvergence { t_max: f64, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

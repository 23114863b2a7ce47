use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` out of domain: {reason}")]
    ParameterDomain { name: &'static str, reason: String },

    /// The linearized single-port model does not apply to these parameters.
    #[error("model validity violated: {0}")]
    ModelValidity(String),

    #[error("effective response is singular at {omega} rad/s")]
    SingularResponse { omega: f64 },

    #[error("mechanical mode is unstable (effective damping {gamma_eff:.6e} rad/s)")]
    Unstable { gamma_eff: f64 },

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("frequency grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("frequency grid does not cover the required range: {0}")]
    GridCoverage(String),

    #[error("frequency {omega} rad/s is not a grid point")]
    OffGrid { omega: f64 },

    #[error("{0} is undefined at zero input power")]
    ZeroPower(&'static str),

    #[error("quantum noise is non-positive ({value:e}) at {omega} rad/s")]
    NegativeNoise { omega: f64, value: f64 },

    #[error("sample rate {sample_rate} Hz must exceed four times the resonance ({resonance_hz} Hz)")]
    Undersampled { sample_rate: f64, resonance_hz: f64 },

    #[error("duration {duration} s is shorter than the required {required} s")]
    DurationTooShort { duration: f64, required: f64 },

    #[error("input is empty")]
    EmptyInput,

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::ParameterDomain {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the physics rather than the inputs:
    /// model-validity violations, instabilities and their numerical symptoms.
    pub fn is_model_failure(&self) -> bool {
        matches!(
            self,
            Error::ModelValidity(_)
                | Error::SingularResponse { .. }
                | Error::Unstable { .. }
                | Error::NegativeNoise { .. }
        )
    }
}

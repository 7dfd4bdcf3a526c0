use thiserror::Error;

/// Errors raised by the simulation and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid node count {0}: N must be even and at least 4")]
    InvalidNodeCount(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("time {t} outside sampled range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("reality condition violated at wavenumber {wavenumber} (deviation {deviation:e})")]
    RealityViolation { wavenumber: usize, deviation: f64 },

    #[error("harmonic bin {bin} exceeds the Nyquist bin {nyquist}")]
    BinBeyondNyquist { bin: usize, nyquist: usize },

    #[error("steady-state window shorter than one drive period")]
    WindowTooShort,

    #[error("singular linear system")]
    Singular,

    #[error("simulation failed at delta_phi2 = {delta_phi2}: {source}")]
    Sweep {
        delta_phi2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

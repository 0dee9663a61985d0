use thiserror::Error;

/// Everything that can go wrong inside the simulator core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-physical sideband pair: n+ = {n_plus}, n- = {n_minus}, |m| = {m_abs}")]
    NonPhysicalPair { n_plus: f64, n_minus: f64, m_abs: f64 },

    #[error("non-physical carrier record: n0 = {n0}, |m0| = {m0_abs}")]
    NonPhysicalCarrier { n0: f64, m0_abs: f64 },

    #[error("noise power must be positive, got {0}")]
    NonPositiveNoise(f64),

    #[error("detuning {0} Hz lies outside the frequency grid (max {1} Hz)")]
    OffGrid(f64, f64),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("group delay undefined: {0}")]
    UndefinedDelay(String),

    #[error("transfer function is not passive: |t({delta})| = {magnitude}")]
    NonPassive { delta: f64, magnitude: f64 },

    #[error("time grid violates the sampling condition: 1/dt = {sample_rate} Hz <= {required} Hz")]
    Nyquist { sample_rate: f64, required: f64 },

    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

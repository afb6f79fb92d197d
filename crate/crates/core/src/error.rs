use thiserror::Error;

/// Errors raised by the spectral, simulation and detection layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} has zero degree")]
    ZeroDegree { vertex: usize },

    #[error("symmetric eigensolver did not converge")]
    ConvergenceFailure,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("spectral index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("indicator filter needs a nonempty pass set")]
    EmptyPassSet,

    #[error("all agent positions coincide")]
    DegeneratePositions,

    #[error("agent {agent} has zero velocity")]
    ZeroVelocity { agent: usize },

    #[error("signal kind {kind} is not available for this state")]
    SignalUnavailable { kind: &'static str },

    #[error("agent {agent} left the numerically stable region (|x| > 1e6)")]
    NumericalBlowup { agent: usize },

    #[error("unknown case id {0} (expected 1..=5)")]
    UnknownCase(u8),

    #[error("no snapshots supplied")]
    EmptyInput,

    #[error("AUC needs at least one positive and one negative label")]
    SingleClass,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wrong model: {0}")]
    WrongModel(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the simulator, the learner and the experiment harness.
#[derive(Debug, Error)]
pub enum QpacError {
    #[error("width mismatch: expected {expected} bits, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("arity {0} exceeds the supported maximum of {max}", max = crate::anf::MAX_ARITY)]
    ArityTooLarge(usize),

    #[error("value {value:#x} does not fit in {width} bits")]
    BitsOutOfRange { value: u64, width: usize },

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QpacError>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit state (expected 1..={num_qubits})")]
    QubitIndexOutOfRange { index: usize, num_qubits: usize },

    #[error("dimension mismatch: expected {expected} qubits, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("amplitude count {0} is not a positive power of two")]
    NotPowerOfTwo(usize),

    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),

    #[error("{what}: {num_qubits} qubits exceeds the cap of {cap}")]
    TooManyQubits {
        what: &'static str,
        num_qubits: usize,
        cap: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("n-tangle undefined for {0} qubits (needs N = 3 or even N)")]
    TangleUndefined(usize),

    #[error("expectation has imaginary residue {0:e}, operator is not Hermitian")]
    ImaginaryResidue(f64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

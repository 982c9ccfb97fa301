//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("interval [{start}, {start}+{len}) out of range for {n_qubits} qubits")]
    IntervalOutOfRange {
        start: usize,
        len: usize,
        n_qubits: usize,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{0}")]
    Precondition(String),

    #[error("operator is not a valid density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("system size {0} exceeds the dense backend limit of {1} qubits")]
    SizeLimit(usize, usize),

    #[error("transfer-matrix assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("eigendecomposition failed")]
    Eigendecomposition,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 precondition/assumption, 4 convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Convergence(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

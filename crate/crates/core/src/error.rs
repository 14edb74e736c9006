use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("matrix is not an isometry (residual {residual:.3e})")]
    NotIsometry { residual: f64 },
    #[error("matrix is not a Kronecker product (residual {residual:.3e})")]
    NotKroneckerForm { residual: f64 },
    #[error("numerical failure in {context} (residual {residual:.3e})")]
    NumericalFailure { context: String, residual: f64 },
    #[error("{n} qubits exceeds the dense cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("cannot block-encode the zero matrix")]
    ZeroMatrix,
    #[error("numerical rank {rank} exceeds requested rank {k}")]
    RankExceeded { rank: usize, k: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, SynthError>;

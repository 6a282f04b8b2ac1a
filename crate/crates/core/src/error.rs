use thiserror::Error;

#[derive(Debug, Error)]
pub enum HamError {
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("block is {rows}x{cols}, expected {expected}x{expected}")]
    BlockShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("block is not Hermitian (max |B - B^dagger| = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("gate {index} is not unitary (max |U U^dagger - I| = {deviation:.3e})")]
    NotUnitary { index: usize, deviation: f64 },

    #[error("operator is not a projector (deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("qubit count mismatch: {left} vs {right}")]
    QubitCountMismatch { left: usize, right: usize },

    #[error("placement maps two qubits onto index {0}")]
    PlacementCollision(usize),

    #[error("iterative eigensolver did not converge after {iterations} iterations (residuals {residuals:?})")]
    NonConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("ground state is degenerate (gap {gap:.3e} <= tolerance {tol:.3e})")]
    DegenerateGround { gap: f64, tol: f64 },

    #[error("no eigenvalue at or below threshold {threshold}")]
    EmptySubspace { threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("promise violated: {0}")]
    PromiseViolation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for HamError {
    fn from(err: serde_json::Error) -> Self {
        HamError::Schema(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HamError>;

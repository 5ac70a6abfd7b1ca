use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid site set: {0}")]
    InvalidSiteSet(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dense operator of dimension {dim} needs {bytes} bytes, over the {budget}-byte budget")]
    MemoryBudget { dim: usize, bytes: usize, budget: usize },

    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge on a block of size {block} (matrix dimension {dim})")]
    EigenConvergence { block: usize, dim: usize },

    #[error("singular value decomposition did not converge for a {rows}x{cols} matrix")]
    SvdConvergence { rows: usize, cols: usize },

    #[error("no eigenstate in normalized energy window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("split operator annihilates the state (total weight {total_weight:e})")]
    ZeroSplitWeight { total_weight: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    TraceNotUnit { trace: f64 },

    #[error("auxiliary population reached {population:.3e} > 0.1; weaken the drive")]
    Nonlinear { population: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

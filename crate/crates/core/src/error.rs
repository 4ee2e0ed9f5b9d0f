use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid norm specification: {0}")]
    InvalidNorm(String),

    #[error("dimension {dim} exceeds the vertex-enumeration cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("linear program is infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded: {0}")]
    Unbounded(String),

    #[error("vector is not in the range of the map")]
    NotInRange,

    #[error("map is not surjective (rank {rank} < target dimension {dim})")]
    NotSurjective { rank: usize, dim: usize },

    #[error("bond at stage {stage} is not a quotient map; min-norm lifting needs a quotient system")]
    NotQuotientBond { stage: usize },

    #[error("stage {stage} out of range 1..={max}")]
    StageOutOfRange { stage: usize, max: usize },

    #[error("incompatible stages: {0}")]
    Incompatible(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid with {nodes} nodes is smaller than the stencil width {width}")]
    StencilTooWide { nodes: usize, width: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular to working precision (smallest pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("singular step matrix at time step {step}")]
    SingularStep { step: usize },

    #[error("non-finite entries in input")]
    NonFinite,

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("trajectory has {len} snapshots, at least {min} required")]
    TrajectoryTooShort { len: usize, min: usize },

    #[error("unknown model label `{0}`")]
    UnknownModel(String),

    #[error("reference vector has zero norm")]
    ZeroNorm,

    #[error("reduced tensor of order {rank} exceeds the limit {limit}")]
    TensorTooLarge { rank: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Attaches a time-step index to a singular solve.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            Error::Singular { .. } => Error::SingularStep { step },
            other => other,
        }
    }
}

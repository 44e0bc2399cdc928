use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("resolution {resolution} too small for cutoff {cutoff} (need at least {required})")]
    Aliasing {
        resolution: usize,
        cutoff: usize,
        required: usize,
    },

    #[error("Gram matrix not positive semidefinite: member {member} has residual {residual:e}")]
    GramNotPsd { member: usize, residual: f64 },

    #[error("ill-conditioned system: condition number {condition:e} exceeds {threshold:e}")]
    IllConditioned { condition: f64, threshold: f64 },

    #[error("rank deficient constraint system: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("empty basis: {0}")]
    EmptyBasis(String),

    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bracketing failed on ({lo}, {hi}]: found {found} of {wanted} roots")]
    Bracketing {
        lo: f64,
        hi: f64,
        found: usize,
        wanted: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

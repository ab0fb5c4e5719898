use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("delta {0} is outside (0, 1/16]")]
    DeltaOutOfRange(f64),
    #[error("odd-set bound requested for even or too small b-norm {0}")]
    EvenBnorm(u64),
    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error("iteration cap of {cap} exceeded (lambda = {lambda})")]
    IterationCap { cap: u64, lambda: f64 },
    #[error("objective target could not be met after {0} decreases of beta")]
    BetaExhausted(u32),
    #[error("invalid assignment: {0}")]
    Assignment(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

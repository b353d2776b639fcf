use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("quadrature failed: achieved error {achieved:.3e}, target {target:.3e}")]
    QuadratureFailed { achieved: f64, target: f64 },

    #[error("capacity solver hit the iteration limit {max_iters} with duality gap {gap:.3e}")]
    MaxItersExceeded { max_iters: usize, gap: f64 },

    #[error("empty class: {0}")]
    EmptyClass(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("instance parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

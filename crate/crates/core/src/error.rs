use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("linearization degenerate: {0}")]
    Degenerate(String),

    #[error("aliasing: {modes} sine modes cannot be resolved on a grid of {grid} points")]
    Aliasing { modes: usize, grid: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state outside admissible ball (|eps| b sum n|a_n| = {measure:.3e} > {limit})")]
    OutOfBall { measure: f64, limit: f64 },

    #[error("patch geometry overlap: interaction margin {measure:.3e} exceeds {limit:.3e}")]
    GeometryOverlap { measure: f64, limit: f64 },

    #[error("newton failed to converge at eps = {eps}: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        eps: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("singular jacobian at eps = {eps}")]
    SingularJacobian { eps: f64 },

    #[error("degenerate conformal map: |phi'| = {0:.3e}")]
    DegenerateMap(f64),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("continuation failed at the first target eps = {eps}: {reason}")]
    EmptyBranch { eps: f64, reason: String },
}

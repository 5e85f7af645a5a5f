use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subalgebra description: {0}")]
    InvalidSubalgebra(String),

    #[error("generated subalgebra exceeds the dimension cap of {cap}")]
    AlgebraDimensionCap { cap: usize },

    #[error("subalgebra check failed: {0}")]
    SubalgebraInvariant(String),

    #[error("coefficient is not in the subalgebra (L2 distance {distance:.3e})")]
    NotInSubalgebra { distance: f64 },

    #[error("X is not self-adjoint (|X - X*| = {0:.3e})")]
    NotSelfAdjoint(f64),

    #[error("operands belong to different coefficient algebras")]
    MixedAlgebras,

    #[error("degree {degree} exceeds the degree cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("{what} needs {size} entries, over the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: usize,
    },

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("|X| = {norm} is not below the radius R = {radius}")]
    RadiusViolation { norm: f64, radius: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

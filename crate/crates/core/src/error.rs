use thiserror::Error;

pub type Result<T> = std::result::Result<T, MgError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MgError {
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    Dimension(usize),

    #[error("invalid polynomial degree {0}")]
    Degree(usize),

    #[error("invalid refinement count {got} for the {case} mesh (need at least {min})")]
    Refinements {
        case: &'static str,
        got: usize,
        min: usize,
    },

    #[error("vector length mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("mesh is not one-irregular: cells {0} and {1} differ by more than one level")]
    NotBalanced(u32, u32),

    #[error("element spaces are not nested: coarse degree {coarse} > fine degree {fine}")]
    NotNested { coarse: usize, fine: usize },

    #[error("inconsistent level pair: {0}")]
    InconsistentLevels(String),

    #[error("polynomial coarsening needs degree >= 2, got {0}")]
    NoCoarserDegree(usize),

    #[error("coarse-grid matrix is not positive definite")]
    SingularCoarseMatrix,

    #[error("solver did not converge within {iterations} iterations (relative residual {relative_residual:e})")]
    Diverged {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

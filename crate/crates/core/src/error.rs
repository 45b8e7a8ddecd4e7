use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Newton iteration stopped without reaching the residual tolerance.
    /// `step` is the time index being solved for, when known.
    #[error("Newton iteration diverged{} after {iterations} iterations (residual {residual:e})", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    NewtonDiverged {
        step: Option<usize>,
        iterations: usize,
        residual: f64,
    },

    #[error("singular matrix at row {row}")]
    SingularMatrix { row: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("incompatible configuration: {0}")]
    Incompatible(String),
}

impl Error {
    pub(crate) fn at_step(self, k: usize) -> Self {
        match self {
            Error::NewtonDiverged {
                iterations,
                residual,
                ..
            } => Error::NewtonDiverged {
                step: Some(k),
                iterations,
                residual,
            },
            other => other,
        }
    }
}

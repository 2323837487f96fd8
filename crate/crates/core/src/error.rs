use thiserror::Error;

/// Errors raised by assembly, solvers, quadrature and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operator of dimension {dimension} exceeds the dense cap {cap}")]
    DimensionTooLarge { dimension: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("factorization singular at shift {shift} after {attempts} perturbed retries")]
    Singular { shift: f64, attempts: usize },

    #[error("eigensolver did not converge after {iterations} iterations (best residuals {best_residuals:?})")]
    NotConverged {
        iterations: usize,
        best_residuals: Vec<f64>,
    },

    #[error("quadrature did not converge: estimate {estimate}, error {error_estimate}")]
    Quadrature { estimate: f64, error_estimate: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("grid refinement unstable: coarse {coarse}, fine {fine}")]
    RefinementUnstable { coarse: f64, fine: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

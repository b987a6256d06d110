use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("eigen-solver failed on a {size}x{size} operator (1-norm condition estimate {condition_estimate:.3e})")]
    EigenSolver {
        size: usize,
        condition_estimate: f64,
    },

    #[error("characteristic determinant refinement did not converge near {guess_re:+.6e}{guess_im:+.6e}i")]
    Refinement { guess_re: f64, guess_im: f64 },

    #[error("no sign change of {quantity} in force bracket [{lo}, {hi}]")]
    Bracket {
        quantity: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("operator eigenvalue {found_re:+.8e}{found_im:+.8e}i is not within {tolerance:e} of i*{omega_c}")]
    StaleThreshold {
        found_re: f64,
        found_im: f64,
        omega_c: f64,
        tolerance: f64,
    },

    #[error("adjoint boundary residual {residual:.3e} exceeds {tolerance:.1e}")]
    DiscretizationInconsistency { residual: f64, tolerance: f64 },

    #[error("{what}: closed form and collocation differ by {difference:.3e}")]
    Consistency { what: &'static str, difference: f64 },

    #[error("adjoint normalization |N| = {magnitude:.3e} is degenerate")]
    DegenerateNormalization { magnitude: f64 },

    #[error("amplitude prediction not applicable: {0}")]
    NotApplicable(String),

    #[error("time stepping failed at t = {time:.6e} with dt = {dt:.3e}: {reason}")]
    Stiffness { time: f64, dt: f64, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Input-validation failures, as opposed to failures of a computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InvalidConfig(_)
                | Error::Shape { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

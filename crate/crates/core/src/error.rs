use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fiber mismatch in {what}: deviation {deviation:e} exceeds tolerance {tol:e}")]
    FiberMismatch {
        what: &'static str,
        deviation: f64,
        tol: f64,
    },
    #[error("base point mismatch: deviation {0:e}")]
    BasePointMismatch(f64),
    #[error("jets are not composable: target and source differ by {0:e}")]
    ChainMismatch(f64),
    #[error("singular jet: linear part is not invertible")]
    SingularJet,
    #[error("first-order faces differ by {0:e}")]
    FaceMismatch(f64),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("expression is not smooth at the evaluation point: {0}")]
    NonSmoothPoint(String),
    #[error("finite-difference stencil leaves the domain")]
    StencilOutOfDomain,
    #[error("i/o error: {0}")]
    Io(String),
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("degenerate metric: |det g| = {0:e}")]
    DegenerateMetric(f64),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("trajectory left the domain at t = {t}")]
    LeftDomain { t: f64 },
    #[error("scalar {0} is not allowed here")]
    BadScalar(f64),
    #[error("torsion does not vanish: |T| = {0:e}")]
    TorsionNotZero(f64),
    #[error("singular frame")]
    SingularFrame,
}

pub type Result<T> = std::result::Result<T, Error>;

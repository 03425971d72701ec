use thiserror::Error;

/// Errors surfaced by the library. Numerical kernels that can fail to
/// converge report the best value found inside the error payload so a
/// caller can still write a diagnostic report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("samples are not strictly increasing at index {0}")]
    NonMonotone(usize),

    #[error("bump constraint solve infeasible: {0}")]
    InfeasibleConstraint(String),

    #[error("root bracketing failed solving F(x) = {target} on [{lo}, {hi}]")]
    BracketFailed { target: f64, lo: f64, hi: f64 },

    #[error("depth {requested} exceeds configured cell budget {budget}")]
    DepthBudget { requested: u32, budget: u64 },

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),

    #[error("table depth mismatch: {0} vs {1}")]
    DepthMismatch(u32, u32),

    #[error("map is not expanding (lambda_{n} = {lambda})")]
    NotExpanding { n: u32, lambda: f64 },

    #[error("operation is defined for degree 2 only (got d = {0})")]
    DegreeTwoOnly(u32),

    #[error("grids are not aligned ({0} vs {1} intervals)")]
    GridMismatch(usize, usize),

    #[error("map kind has no branch derivative")]
    NoDerivative,

    #[error("iteration did not converge: residual {residual} after {iterations} steps")]
    NonConvergence { residual: f64, iterations: u32 },

    #[error("scale t = {t} is below knot resolution {spacing}")]
    ScaleBelowResolution { t: f64, spacing: f64 },

    #[error("insufficient knot range: need {needed}, have {have}")]
    InsufficientRange { needed: f64, have: f64 },

    #[error("zero denominator in three-point ratio at x = {0}")]
    ZeroDenominator(f64),

    #[error("zero parent mass for word index {0}")]
    ZeroParentMass(u64),

    #[error("word digit {digit} out of range for degree {degree}")]
    DigitOutOfRange { digit: u8, degree: u32 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

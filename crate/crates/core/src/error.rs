use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid spin state: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("continuation stalled at g = {last_good_g}: {reason}")]
    ContinuationStall { last_good_g: f64, reason: String },
    #[error("newton iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("sector dimension {dim} exceeds guard {guard}")]
    DimensionGuard { dim: usize, guard: usize },
    #[error("singular pair operator: e_k = {0} coincides with a level")]
    SingularPairOperator(f64),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("period matrix invalid: {0}")]
    InvalidPeriods(String),
    #[error("divisor inversion failed: {0}")]
    Inversion(String),
    #[error("divisor collision at t = {t} (gap {gap:e})")]
    DivisorCollision { t: f64, gap: f64 },
    #[error("tracking failure at parameter {param}: {reason}")]
    Tracking { param: f64, reason: String },
    #[error("pfaffian: {0}")]
    Pfaffian(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpectrum(_) => "invalid_spectrum",
            Error::InvalidState(_) => "invalid_state",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::ContinuationStall { .. } => "continuation_stall",
            Error::NoConvergence(_) => "no_convergence",
            Error::DimensionGuard { .. } => "dimension_guard",
            Error::SingularPairOperator(_) => "singular_pair_operator",
            Error::DegenerateCurve(_) => "degenerate_curve",
            Error::RootFinding(_) => "root_finding",
            Error::Quadrature(_) => "quadrature",
            Error::InvalidPeriods(_) => "invalid_periods",
            Error::Inversion(_) => "inversion",
            Error::DivisorCollision { .. } => "divisor_collision",
            Error::Tracking { .. } => "tracking",
            Error::Pfaffian(_) => "pfaffian",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

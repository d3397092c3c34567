use thiserror::Error;

/// Errors raised by the spectral kernels, solvers and study harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),
    #[error("symbol is not even under k -> -k at k = ({k1}, {k2}); result would not be real")]
    RealnessViolation { k1: f64, k2: f64 },
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),
    #[error("block index {j} outside representable range [{lo}, {hi}]")]
    Index { j: i32, lo: i32, hi: i32 },
    #[error("ordering error: {0}")]
    Ordering(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("solver failure at t = {t}: {reason}")]
    SolverFailure { t: f64, reason: String },
    #[error("sweep member {param} failed: {source}")]
    SweepMember {
        param: f64,
        #[source]
        source: Box<LabError>,
    },
    #[error("snapshot format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl LabError {
    /// Whether the error comes from the input rather than from a solve.
    pub fn is_validation(&self) -> bool {
        matches!(self, LabError::Config(_) | LabError::Invalid(_))
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CertifyError>;

/// Every failure the toolkit reports. Variants carry the offending indices so
/// callers (and the CLI) can point at the exact row, column or state.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("state space needs at least 2 states, got {0}")]
    TooFewStates(usize),

    #[error("row {row} has {len} entries, expected {expected}")]
    DimensionMismatch {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("{what} has length {len}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        len: usize,
        expected: usize,
    },

    #[error("entry P[{row}][{col}] = {value} is not a probability")]
    InvalidProbability { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum:.17}, not 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("pi is not stationary: max |piP(x) - pi(x)| = {residual:e} at state {state}")]
    NotStationary { state: usize, residual: f64 },

    #[error("detailed balance fails at ({x}, {y}): |pi(x)p(x,y) - pi(y)p(y,x)| = {residual:e}")]
    NotReversible { x: usize, y: usize, residual: f64 },

    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("state {state} has probability mass {value:e}, which is too small")]
    ZeroMass { state: usize, value: f64 },

    #[error("symmetric eigensolver failed: {0}")]
    SpectralFailure(String),

    #[error("exact evaluation needs ~{work:e} scalar operations, above the cap of {cap:e}")]
    BudgetOverflow { work: f64, cap: f64 },

    #[error("path enumeration needs {paths:e} paths, above the cap of {cap:e}")]
    TooLarge { paths: f64, cap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl CertifyError {
    /// Stable short name of the variant, used in CLI diagnostics and JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            CertifyError::TooFewStates(_) => "TooFewStates",
            CertifyError::DimensionMismatch { .. } => "DimensionMismatch",
            CertifyError::LengthMismatch { .. } => "LengthMismatch",
            CertifyError::InvalidProbability { .. } => "InvalidProbability",
            CertifyError::NotStochastic { .. } => "NotStochastic",
            CertifyError::InvalidDistribution(_) => "InvalidDistribution",
            CertifyError::NotStationary { .. } => "NotStationary",
            CertifyError::NotReversible { .. } => "NotReversible",
            CertifyError::NotErgodic(_) => "NotErgodic",
            CertifyError::ZeroMass { .. } => "ZeroMass",
            CertifyError::SpectralFailure(_) => "SpectralFailure",
            CertifyError::BudgetOverflow { .. } => "BudgetOverflow",
            CertifyError::TooLarge { .. } => "TooLarge",
            CertifyError::InvalidArgument(_) => "InvalidArgument",
        }
    }

    /// True for errors caused by a resource cap rather than invalid input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            CertifyError::BudgetOverflow { .. } | CertifyError::TooLarge { .. }
        )
    }
}

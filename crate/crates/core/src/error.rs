use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HgrError {
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("need at least {required} observations, got {found}")]
    TooFewObservations { required: usize, found: usize },
    #[error("invalid degree {0}: must be >= 1")]
    InvalidDegree(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("no oracle copula registered for relation {0}")]
    NoOracle(String),
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("non-numeric value {value:?} in column {column} (row {row})")]
    NonNumericValue {
        column: String,
        row: usize,
        value: String,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl HgrError {
    /// True for failures caused by the numbers themselves rather than by
    /// malformed input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(self, HgrError::NumericalFailure(_))
    }
}

pub type Result<T> = core::result::Result<T, HgrError>;

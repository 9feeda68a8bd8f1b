use thiserror::Error;

/// Error type shared by all modules. Display output starts with the error
/// name so CLI surfaces match the library contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NonPositiveWeight: weight {value} at position {index} must be strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("EmptyAlphabet: at least one symbol is required")]
    EmptyAlphabet,

    #[error("DuplicateLabel: label {0:?} appears more than once")]
    DuplicateLabel(String),

    #[error("UnknownLabel: label {0:?} is not in the alphabet")]
    UnknownLabel(String),

    #[error("AlphabetMismatch: {0}")]
    AlphabetMismatch(String),

    #[error("NonPositiveOrder: order parameter {0} must be strictly positive and finite")]
    NonPositiveOrder(f64),

    #[error("DegenerateParameters: {0}")]
    DegenerateParameters(String),

    #[error("ZeroQ: q must be nonzero for this operation")]
    ZeroQ,

    #[error("NonPositiveQ: q = {0} must be strictly positive for this operation")]
    NonPositiveQ(f64),

    #[error("BudgetExceeded: {0} candidate strategies exceed the enumeration budget {1}")]
    BudgetExceeded(f64, f64),

    #[error("DimensionTooLarge: simplex dimension {0} exceeds the grid-search limit {1}")]
    DimensionTooLarge(usize, usize),

    #[error("NonConvergence: {0}")]
    NonConvergence(String),

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

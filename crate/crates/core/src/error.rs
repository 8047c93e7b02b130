use crate::measure::MeasurableSet;

/// Errors raised by the measure, kernel and operator routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("duplicate atom label `{0}`")]
    DuplicateLabel(String),

    #[error("atom `{label}` has invalid weight {weight}")]
    InvalidWeight { label: String, weight: f64 },

    #[error("index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parts {first} and {second} overlap")]
    OverlappingParts { first: usize, second: usize },

    #[error("set function is not additive: value {given} on {set:?} but its atoms sum to {implied}")]
    Inconsistent {
        set: Vec<usize>,
        given: String,
        implied: String,
    },

    #[error("set function has no value on {0:?}")]
    Undefined(Vec<usize>),

    #[error("set function is not in the RKHS of the measure (violating parts: {witness:?})")]
    NotMember { witness: Vec<MeasurableSet> },

    #[error("atom {atom} is outside the support of measure {measure}")]
    Domain { atom: usize, measure: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("no strictly positive sample weights")]
    NoPositiveWeights,
    #[error("labelled data must contain both classes")]
    SingleClassLabels,
    #[error("not enough rows: need {needed}, have {available}")]
    TooFewRows { needed: usize, available: usize },
    #[error("labelled sample contained a single class after {0} attempts")]
    SingleClassAfterRetries(usize),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

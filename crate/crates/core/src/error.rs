use thiserror::Error;

/// Errors raised by sequence, kernel and RKHS operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet must contain at least one letter")]
    EmptyAlphabet,

    #[error("duplicate letter `{0}` in alphabet")]
    DuplicateLetter(String),

    #[error("the stop symbol `$` is reserved and cannot be an alphabet letter")]
    ReservedStop,

    #[error("alphabet has {0} letters; at most 255 are supported")]
    AlphabetTooLarge(usize),

    #[error("letter `{0}` is not in the alphabet")]
    UnknownLetter(String),

    #[error("sequences are over different alphabets")]
    AlphabetMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("a kernel sum needs at least one part")]
    EmptyKernelSum,

    #[error("tilting function returned non-positive value {0}")]
    NonPositiveTilt(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical overflow in {0}")]
    NumericalOverflow(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("duplicate sequence `{0}` in Gram matrix input")]
    DuplicateSequence(String),

    #[error("target sequence is missing from set {0}")]
    TargetMissing(usize),

    #[error("sequence length {len} exceeds the enumeration budget of {max}")]
    EnumerationBudget { len: usize, max: usize },

    #[error("no embedding for sequence `{0}`")]
    EmbeddingLookup(String),

    #[error("sample must not be empty")]
    EmptySample,

    #[error("{0} bootstrap replicates requested; at least 100 are required")]
    TooFewBootstrap(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::fmt;

use seqkern::Error;

/// A failed run, classified by the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Data(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Failure::Data(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = match &e {
            Error::Config(m) | Error::Io(m) => m.clone(),
            other => other.to_string(),
        };
        match e {
            Error::EmptyAlphabet
            | Error::DuplicateLetter(_)
            | Error::ReservedStop
            | Error::AlphabetTooLarge(_)
            | Error::InvalidParameter { .. }
            | Error::EmptyKernelSum
            | Error::EnumerationBudget { .. }
            | Error::TooFewBootstrap(_)
            | Error::Config(_) => Failure::Config(msg),
            Error::UnknownLetter(_)
            | Error::AlphabetMismatch
            | Error::DimensionMismatch { .. }
            | Error::DuplicateSequence(_)
            | Error::TargetMissing(_)
            | Error::EmbeddingLookup(_)
            | Error::EmptySample
            | Error::Io(_) => Failure::Data(msg),
            Error::NonPositiveTilt(_) | Error::NumericalOverflow(_) | Error::Numerical(_) => Failure::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

use std::fmt;

use thiserror::Error;

use crate::conllu::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty block")]
    EmptyBlock,

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid instance: {}", ViolationList(.0))]
    Invalid(Vec<Violation>),

    #[error("instance {index}: {source}")]
    InInstance {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("missing gold surface")]
    MissingGold,

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("separator {separator:?} occurs in token {token:?}")]
    SeparatorCollision { separator: String, token: String },

    #[error("index {index} out of range for factor {factor} (size {size})")]
    IndexOutOfRange {
        factor: String,
        index: usize,
        size: usize,
    },

    #[error("map file line {line}: {message}")]
    MapFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attaches the (0-based) index of the instance that failed.
    pub fn in_instance(self, index: usize) -> Self {
        Error::InInstance {
            index,
            source: Box::new(self),
        }
    }
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

use thiserror::Error;

/// Errors produced by the merge calculus, trainers and file formats.
#[derive(Debug, Error)]
pub enum BpeError {
    #[error("merge handle {0} is not in the table")]
    InvalidHandle(u32),

    #[error("merge handle {0} is a single symbol, expected a composite merge")]
    NotComposite(u32),

    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(char),

    #[error("merge sequence is invalid at position {position}")]
    InvalidSequence { position: usize },

    #[error("no adjacent pair is available")]
    NoPair,

    #[error("malformed permutation: {0}")]
    MalformedPermutation(String),

    #[error("sequence length {len} exceeds the supported maximum of {max}")]
    Capacity { len: usize, max: usize },

    #[error("{0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: no earlier merge yields {yield_:?}")]
    Ambiguity { line: usize, yield_: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = BpeError> = std::result::Result<T, E>;

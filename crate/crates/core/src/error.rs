use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("corpus is not normalized: unexpected character {0:?}")]
    UnnormalizedCorpus(char),

    #[error("discount {index} out of range [0, 1]: {value}")]
    InvalidDiscount { index: usize, value: f64 },

    #[error("distribution is missing symbol {0:?}")]
    MissingSymbol(char),

    #[error("boards do not hold the same cell contents")]
    ContentMismatch,

    #[error("at most {max} suggestions fit on the board, got {got}")]
    TooManySuggestions { max: usize, got: usize },

    #[error("duplicate suggestion {0:?}")]
    DuplicateSuggestion(String),

    #[error("expected {expected} {what}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("degenerate scores: {0}")]
    DegenerateScores(String),

    #[error("unknown subject {0:?}")]
    UnknownSubject(String),

    #[error("insufficient subject data: {0}")]
    InsufficientData(String),

    #[error("zero elapsed time")]
    ZeroElapsed,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("bad LM dump: {0}")]
    LmFormat(String),

    #[error("suggester transport: {0}")]
    Transport(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

use thiserror::Error;

/// Errors raised by the word calculus, the space builder and the flag queries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {what}: {msg}")]
    Parse { what: &'static str, msg: String },

    #[error("dimension {0} is outside the supported range 1..=62")]
    DimensionOutOfRange(usize),

    #[error("letter [{lo},{hi}] is not a valid interval of [0,{n}]")]
    LetterOutOfRange { lo: usize, hi: usize, n: usize },

    #[error("dimension mismatch: expected N={expected}, found N={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("word {0} is not reduced")]
    NotReduced(String),

    #[error("letter sizes of {0} are not non-increasing")]
    NotMonotone(String),

    #[error("search bound exceeded: instance size {size} > cap {cap}")]
    SearchBoundExceeded { size: usize, cap: usize },

    #[error("step budget of {budget} rewrite applications exhausted")]
    StepBudgetExhausted { budget: usize },

    #[error("bounded search exhausted at length {bound} without a decision")]
    BoundExhausted { bound: usize },

    #[error("anchor level mismatch: {0}")]
    AnchorLevelMismatch(String),

    #[error("anchor {lo} does not lie beneath anchor {hi}")]
    AnchorsNotOver { lo: String, hi: String },

    #[error("vertex v{vertex} has level {level}, outside the level interval {interval}")]
    LevelNotInT {
        vertex: usize,
        level: usize,
        interval: String,
    },

    #[error("unknown vertex v{0}")]
    UnknownVertex(usize),

    #[error("not a flag: {0}")]
    NotAFlag(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("flags do not differ exactly at the letter {0}")]
    DifferenceMismatch(String),

    #[error("{target} is not a permutation of {word}")]
    NotAPermutation { word: String, target: String },

    #[error("the vertex set contains no flag")]
    NoFlagInX,

    #[error("flag {0} is not contained in the given set")]
    GNotInX(String),

    #[error("unknown suite {0:?}")]
    UnknownSuite(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse-error",
            Error::DimensionOutOfRange(_) => "dimension-out-of-range",
            Error::LetterOutOfRange { .. } => "letter-out-of-range",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotReduced(_) => "not-reduced",
            Error::NotMonotone(_) => "not-monotone",
            Error::SearchBoundExceeded { .. } => "search-bound-exceeded",
            Error::StepBudgetExhausted { .. } => "step-budget-exhausted",
            Error::BoundExhausted { .. } => "bound-exhausted",
            Error::AnchorLevelMismatch(_) => "anchor-level-mismatch",
            Error::AnchorsNotOver { .. } => "anchors-not-over",
            Error::LevelNotInT { .. } => "level-not-in-t",
            Error::UnknownVertex(_) => "unknown-vertex",
            Error::NotAFlag(_) => "not-a-flag",
            Error::PreconditionViolated(_) => "precondition-violated",
            Error::DifferenceMismatch(_) => "difference-mismatch",
            Error::NotAPermutation { .. } => "not-a-permutation",
            Error::NoFlagInX => "no-flag-in-x",
            Error::GNotInX(_) => "g-not-in-x",
            Error::UnknownSuite(_) => "unknown-suite",
            Error::Json(_) => "json-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

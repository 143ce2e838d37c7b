use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // input / data errors
    #[error("sentence contains no tokens")]
    SentenceEmpty,
    #[error("document `{0}` has no sentences")]
    EmptyDocument(String),
    #[error("no training data")]
    NoTrainingData,
    #[error("malformed pretagged input at line {line}: {token:?} has no `/`")]
    MalformedPretagged { line: usize, token: String },
    #[error("token id {id} out of range for table with {rows} rows")]
    BadTokenId { id: usize, rows: usize },
    #[error("sentence length {len} is shorter than the widest receptive field {needed}")]
    SentenceTooShort { len: usize, needed: usize },
    #[error("embedding file line {line}: expected {expected} values, found {found}")]
    EmbeddingDimMismatch { line: usize, expected: usize, found: usize },
    #[error("label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },
    #[error("only one class present in the training labels")]
    DegenerateLabels,
    #[error("no segment predictions to vote on")]
    NoSegments,
    #[error("author {0} has no training segments at this fraction")]
    InsufficientData(usize),
    #[error("corpus not found or empty: {0}")]
    MissingCorpus(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),

    // numeric failures
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("objective evaluated to a non-finite value")]
    NonFiniteLoss,
    #[error("non-finite activation in layer `{0}`")]
    NumericOverflow(&'static str),
    #[error("non-finite gradient in parameter block `{0}`")]
    NonFiniteGradient(String),
    #[error("training diverged at epoch {epoch}: loss {loss} exceeds 10x the initial {initial}")]
    Diverged { epoch: usize, loss: f64, initial: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical method rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteLoss
                | Error::NumericOverflow(_)
                | Error::NonFiniteGradient(_)
                | Error::Diverged { .. }
        )
    }
}

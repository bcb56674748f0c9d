use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty: no document has any retained token")]
    EmptyCorpus,

    #[error("document is empty")]
    EmptyDocument,

    #[error("unknown word: {0}")]
    UnknownWord(String),

    #[error("word is excluded from translation: {0}")]
    ExcludedWord(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("word id {id} outside vocabulary of size {size}")]
    VocabMismatch { id: usize, size: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symmetric eigendecomposition did not converge")]
    EigenFailure,

    #[error("heat kernel entry ({row}, {col}) is negative: {value:e}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {0} sums to zero")]
    ZeroRow(usize),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("negative residual {0:e}")]
    NegativeResidual(f64),

    #[error("degenerate class structure: {0}")]
    DegenerateClass(String),

    #[error("insufficient class data: {0}")]
    InsufficientClassData(String),

    #[error("bad model file magic")]
    BadMagic,

    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that indicate a numerical problem rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure
                | Error::NegativeEntry { .. }
                | Error::ZeroRow(_)
                | Error::NegativeResidual(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("channel count mismatch: {left} vs {right}")]
    ChannelMismatch { left: usize, right: usize },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("need at least {required} epochs, got {actual}")]
    TooFewEpochs { required: usize, actual: usize },

    #[error("channel '{channel}' has near-zero variance and cannot be normalized")]
    DegenerateChannel { channel: String },

    #[error("channel '{channel}' has fewer than 2 readings")]
    TooFewReadings { channel: String },

    #[error("channel '{channel}' not present in record '{patient_id}'")]
    MissingChannel { channel: String, patient_id: String },

    #[error("median filter window must be odd, got {window}")]
    EvenWindow { window: usize },

    #[error("median filter window {window} exceeds segment length {length}")]
    WindowExceedsLength { window: usize, length: usize },

    #[error("perturbation window is empty")]
    EmptyPerturbationWindow,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("distance matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },

    #[error("distance matrix has negative entry at ({row}, {col})")]
    NegativeDistance { row: usize, col: usize },

    #[error("distance matrix diagonal is nonzero at {index}")]
    NonzeroDiagonal { index: usize },

    #[error("need at least {required} points to embed in {dims} dimensions, got {actual}")]
    Dimensionality {
        required: usize,
        actual: usize,
        dims: usize,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("corrupt artifact {path}: {reason}")]
    Corrupt { path: String, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("signal has zero mean power, SNR is undefined")]
    ZeroPowerSignal,

    #[error("no window reached the trigger energy threshold")]
    NoTrigger,

    #[error("input has {len} samples, capture needs {needed}")]
    InputTooShort { len: usize, needed: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sequence of length {len} is too short, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("empty packet")]
    EmptyPacket,

    #[error("shape error: {0}")]
    Shape(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("need more than k = {k} training rows, got {rows}")]
    NotEnoughTrainingData { rows: usize, k: usize },

    #[error("non-finite feature value")]
    NonFiniteFeature,

    #[error("training data contains {count} UAV-labelled rows; only recognized signals may be used for fitting")]
    UavInTraining { count: usize },

    #[error("evaluation set is empty")]
    EmptyEval,

    #[error("length mismatch: {truth} labels vs {pred} predictions")]
    LengthMismatch { truth: usize, pred: usize },

    #[error("nothing to evaluate")]
    Empty,

    #[error("confusion matrix is empty")]
    EmptyMatrix,

    #[error("bad signal file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("malformed record: {0}")]
    Record(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid generator matrix: {0}")]
    GeneratorMatrix(String),
    #[error("symbol index {0} out of range 0..4")]
    SymbolIndex(u8),
    #[error("invalid bit frame: {0}")]
    Frame(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("frame of {0} bits is too long for exhaustive decoding (max 16)")]
    FrameTooLong(usize),
    #[error("invalid SNR grid: {0}")]
    SnrGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("incomplete competition record: {0} subcompetitions (need 3)")]
    IncompleteRecord(usize),
    #[error("dimension mismatch: model expects {expected} inputs, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("model scaler has not been fitted")]
    Untrained,
    #[error("training data must contain both labels")]
    SingleClass,
    #[error("invalid model file: {0}")]
    ModelFormat(String),
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

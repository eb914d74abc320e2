use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown environment kind `{0}`")]
    UnknownEnv(String),
    #[error("invalid grid size {0} (expected 5..=9)")]
    InvalidSize(i64),
    #[error("action {action} out of range for {count} actions")]
    ActionOutOfRange { action: usize, count: usize },
    #[error("step called after the episode finished")]
    EpisodeDone,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("keep set is empty; trajectory unusable at this policy")]
    EmptyKeepSet,
    #[error("buffer is empty")]
    EmptyBuffer,
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("no data: {0}")]
    NoData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

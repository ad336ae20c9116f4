use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no term survives the document-frequency filters")]
    EmptyVocabulary,
    #[error("document has no in-vocabulary tokens")]
    EmptyDocument,
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("unknown topic {topic} (model has {k} topics)")]
    UnknownTopic { topic: usize, k: usize },
    #[error("no document carries a timestamp")]
    NoTimestampedDocuments,
    #[error("topic {0} has fewer than two annotators")]
    InsufficientAnnotators(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("word id {id} out of range for vocabulary of size {v}")]
    OutOfVocabulary { id: usize, v: usize },
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

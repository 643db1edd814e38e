use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid document id: {0}")]
    InvalidId(String),

    #[error("malformed date `{0}`")]
    MalformedDate(String),

    #[error("malformed record: {0}")]
    Record(String),

    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("xml: {0}")]
    Xml(String),

    #[error("contradictory family table: {doc} is listed under both `{first}` and `{second}`")]
    FamilyConflict {
        doc: String,
        first: String,
        second: String,
    },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed run: {0}")]
    MalformedRun(String),

    #[error("query document {0} has no abstract, description or claims")]
    NoText(String),

    #[error("search service: {0}")]
    Remote(String),

    #[error("no evaluable queries (N = 0)")]
    EmptyEvaluation,

    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Path { path, source }
    }

    /// Process exit status for this error: 1 usage/config, 2 data, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io(_) | Error::Path { .. } => 3,
            _ => 2,
        }
    }
}

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate category path `{0}`")]
    DuplicateCategory(String),

    #[error("category `{path}` has no parent `{parent}` in the taxonomy")]
    MissingParent { path: String, parent: String },

    #[error("invalid taxonomy: {0}")]
    InvalidTaxonomy(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error on line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("corpus is empty after filtering")]
    EmptyCorpus,

    #[error("missing embedding for key `{0}`")]
    MissingKey(String),

    #[error("invalid weight {weight} for term {term}: weights must be finite and nonnegative")]
    InvalidWeight { term: u32, weight: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("nothing to evaluate")]
    EmptyEval,

    #[error("documents missing on one side of the evaluation: {}", .0.join(", "))]
    IdMismatch(Vec<String>),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => 2,
            Error::NotFound(_) => 2,
            Error::EmptyCorpus => 3,
            Error::Config(_) => 4,
            Error::IdMismatch(_) => 5,
            _ => 1,
        }
    }
}

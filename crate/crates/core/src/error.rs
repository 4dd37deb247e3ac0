use std::path::PathBuf;

use thiserror::Error;

use crate::ids::ArticleId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("article {id}: {message}")]
    Article { id: ArticleId, message: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("insufficient sentences: {0}")]
    Shortfall(String),

    #[error("training error: class {class} has no in-vocabulary terms")]
    EmptyClass { class: ArticleId },

    #[error("invalid prediction matrix: {0}")]
    Predictions(String),

    #[error("clustering error: {0}")]
    Clustering(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.to_string(),
        }
    }

    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Config(_) => "config",
            Error::Article { .. } => "article",
            Error::Empty(_) => "empty",
            Error::Shortfall(_) => "shortfall",
            Error::EmptyClass { .. } => "empty_class",
            Error::Predictions(_) => "predictions",
            Error::Clustering(_) => "clustering",
            Error::Eval(_) => "eval",
        }
    }
}

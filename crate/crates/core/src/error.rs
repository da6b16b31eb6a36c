use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate record id {0}")]
    DuplicateId(u32),

    #[error("empty corpus: at least one document is required")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported confidence level {0} (expected one of 0.90, 0.95, 0.975, 0.99, 0.995)")]
    UnsupportedConfidence(f64),

    #[error("node {node} ({term}) has {parents} parents, more than the cap of {cap}")]
    TooManyParents {
        node: usize,
        term: String,
        parents: usize,
        cap: usize,
    },

    #[error("malformed network: {0}")]
    MalformedNetwork(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("evidence has zero probability under the network")]
    ImpossibleEvidence,

    #[error("{nodes} nodes is too many for exhaustive enumeration (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },

    #[error("{0}")]
    Mismatch(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn format(message: impl Into<String>) -> Self {
        Error::Format(message.into())
    }

    /// Attach the offending file to an error.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

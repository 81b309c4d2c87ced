use std::path::PathBuf;

use thiserror::Error;

use crate::MersenneIndex;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operation needs a complete factorization but was handed a partial one.
    #[error("factorization of {what} is incomplete (composite cofactor {cofactor})")]
    Incomplete { what: String, cofactor: String },

    #[error("divisor form violated: ({q} - 1) is not divisible by 2*{p}")]
    DivisorForm { q: String, p: MersenneIndex },

    #[error("cache entry verification failed: {}", format_failures(.0))]
    CacheVerification(Vec<EntryFailure>),

    #[error("cache parse error in {path}: {source}")]
    CacheParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One rejected cache entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryFailure {
    pub n: MersenneIndex,
    pub reason: String,
}

fn format_failures(failures: &[EntryFailure]) -> String {
    failures
        .iter()
        .map(|f| format!("n={}: {}", f.n, f.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Crate-wide error type. Variants carry a coarse category that the CLI maps
//! onto process exit codes (validation / I/O / internal).

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A line of an input file could not be interpreted.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Input data or configuration violates a documented precondition.
    #[error("{0}")]
    Validation(String),

    /// A referenced vertex, edge, or key does not exist.
    #[error("lookup failed: {0}")]
    Lookup(String),

    /// Underlying filesystem failure, annotated with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A persisted artifact is corrupt, truncated, or has the wrong layout.
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },

    /// A staged artifact was produced from a different graph than the one it
    /// is being used with.
    #[error(
        "fingerprint mismatch: artifact carries {found:#018x}, expected {expected:#018x}; {hint}"
    )]
    Fingerprint {
        expected: u64,
        found: u64,
        hint: String,
    },

    /// Extra context wrapped around an inner error (e.g. the fold index).
    #[error("{ctx}: {source}")]
    Context {
        ctx: String,
        #[source]
        source: Box<Error>,
    },

    /// A bug: a state the implementation promises is unreachable.
    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Wrap with a context prefix, preserving the inner category.
    pub fn context(self, ctx: impl Into<String>) -> Self {
        Error::Context {
            ctx: ctx.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code contract: 1 validation, 2 I/O, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Lookup(_)
            | Error::Fingerprint { .. } => 1,
            Error::Io { .. } | Error::Format { .. } => 2,
            Error::Internal(_) => 3,
            Error::Context { source, .. } => source.exit_code(),
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading inputs, writing outputs or running the core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("signal column `{0}` has no coordinate row")]
    StationMismatch(String),

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("{0}")]
    Usage(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] diffgsp_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: u64, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, msg: msg.into() }
    }

    /// Process exit code: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use diffgsp_core::Error as C;
        match self {
            Error::Usage(_) | Error::Config { .. } => 1,
            Error::FileNotFound(_) | Error::Parse { .. } | Error::StationMismatch(_) | Error::Io { .. } => 2,
            Error::Core(e) => match e {
                C::BadParams(_) | C::BadTruncation { .. } => 1,
                C::NumericalFailure
                | C::NotPsd(_)
                | C::FilterPole(_)
                | C::NotErgodic(_)
                | C::AllSkipped
                | C::ZeroRange => 3,
                _ => 2,
            },
        }
    }
}

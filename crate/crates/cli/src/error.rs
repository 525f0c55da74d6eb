use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] cspin_core::Error),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for anything the caller can fix by changing the invocation,
    /// 2 for failures inside the numerics or the filesystem.
    pub fn exit_code(&self) -> i32 {
        use cspin_core::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(e) => match e {
                E::InvalidSector { .. } | E::InvalidParameter(_) | E::InvalidState(_) | E::Unsupported(_) => 1,
                E::Numerical(_) | E::BranchAmbiguity { .. } => 2,
            },
            CliError::Io { .. } => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

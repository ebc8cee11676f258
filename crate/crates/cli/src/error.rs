use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Budget(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] rcc_core::Error),
}

impl CliError {
    /// 2 for bad input or configuration, 3 when a resource budget ran out,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use rcc_core::Error as E;
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::InvalidHyperparams(_) | E::InvalidArgument(_) | E::Parse { .. } | E::Json(_) => 2,
                E::CliqueBudget { .. } => 3,
                E::Io(_) | E::Numerical(_) | E::Invariant(_) | E::NoConvergence { .. } => 1,
            },
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches the file name to parse and JSON errors.
    pub(crate) fn in_file(path: &Path, e: rcc_core::Error) -> Self {
        match e {
            rcc_core::Error::Io(source) => Self::io(path, source),
            rcc_core::Error::Parse { .. }
            | rcc_core::Error::Json(_)
            | rcc_core::Error::InvalidArgument(_) => CliError::Validation(format!("{}: {e}", path.display())),
            other => CliError::Core(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

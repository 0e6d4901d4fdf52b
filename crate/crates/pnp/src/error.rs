use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}:{line}: {message}", path.display())]
    Config { path: PathBuf, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// A core error raised while reading a particular input file.
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: pnp_core::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] pnp_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), message: message.into() }
    }

    /// 0 success, 1 usage or config, 2 data, 3 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Io { .. } | CliError::Format { .. } => 2,
            CliError::Input { source, .. } | CliError::Core(source) => core_code(source),
        }
    }
}

fn core_code(e: &pnp_core::Error) -> i32 {
    use pnp_core::Error::*;
    match e {
        InvalidParameter(_) => 1,
        MemoryBudget { .. } | TableTooLarge { .. } => 3,
        _ => 2,
    }
}

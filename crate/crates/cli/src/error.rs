use std::path::PathBuf;

use thiserror::Error;

/// Failures that abort a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] gprlab_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input, 3 for anything that went wrong while running.
    pub fn exit_code(&self) -> u8 {
        use gprlab_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                E::NonPositiveField(_)
                | E::NonFiniteField(_)
                | E::LengthMismatch { .. }
                | E::DimensionMismatch { .. }
                | E::ZeroPower
                | E::NotMiso { .. }
                | E::NotSimo { .. }
                | E::GridTooLarge { .. }
                | E::InvalidArgument(_),
            ) => 2,
            CliError::Core(_) | CliError::Io { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

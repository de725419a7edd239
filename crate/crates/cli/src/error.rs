use std::path::PathBuf;

/// Failures of a CLI job, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{engine} engine failed: {source}")]
    Engine {
        engine: &'static str,
        #[source]
        source: wgqed_core::Error,
    },
    #[error("{count} verification check(s) failed")]
    VerificationFailed { count: usize },
    #[error("{failed} of {total} sweep point(s) failed")]
    SweepFailed { failed: usize, total: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerificationFailed { .. } | CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Engine { .. } | CliError::SweepFailed { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

use std::path::PathBuf;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] synthmix::Error),

    #[error("{0}")]
    Usage(String),

    #[error("validation failed: {0}")]
    ValidationFailed(String),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to read sweep spec {path}: {reason}")]
    Spec { path: PathBuf, reason: String },
}

impl CliError {
    /// 2 for bad input, 3 when the model leaves its numerical domain,
    /// 4 for failed validation checks, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        use synthmix::Error as E;
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(E::Io { .. }) => 1,
            CliError::Core(_) | CliError::Usage(_) | CliError::Spec { .. } => 2,
            CliError::ValidationFailed(_) => 4,
            CliError::Write { .. } => 1,
        }
    }
}

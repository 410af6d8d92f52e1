use std::path::PathBuf;

use opo_core::Error as CoreError;

/// Process exit code for invalid input.
pub const EXIT_CONFIG: i32 = 2;
/// Process exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("invalid input: {0}")]
    Domain(CoreError),
}

impl SimError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

impl From<CoreError> for SimError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Diverged { .. }
            | CoreError::NoStableRoot
            | CoreError::Unstable(_)
            | CoreError::NoFringes
            | CoreError::ZeroIntensity => SimError::Numerical(e),
            _ => SimError::Domain(e),
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;

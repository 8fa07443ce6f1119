use std::io;
use std::path::PathBuf;

use qwalk_core::Error as CoreError;

/// Exit codes: 0 success, 1 I/O failure, 2 invalid configuration, 3
/// numerical failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Error for a key whose value is out of range or malformed.
    pub fn invalid(key: &str, value: impl std::fmt::Display, why: &str) -> Self {
        CliError::Config(format!("invalid value for `{key}`: {value} ({why})"))
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                CoreError::InvalidConfig(_)
                | CoreError::InvalidEpsilon(_)
                | CoreError::InvalidMode(_)
                | CoreError::CycleUnsupported
                | CoreError::DegenerateInput(_) => 2,
                CoreError::NotHermitian { .. }
                | CoreError::NotUnitary { .. }
                | CoreError::NonFinite { .. }
                | CoreError::ConvergenceFailure { .. }
                | CoreError::DimensionMismatch { .. }
                | CoreError::BoundaryOverflow { .. }
                | CoreError::NumericalCorruption { .. }
                | CoreError::LatticeMismatch
                | CoreError::EmptySeries => 3,
            },
        }
    }
}

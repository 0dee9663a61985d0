use std::path::PathBuf;

use eitsq_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: line {line}: `{key}`: {msg}")]
    Config { line: usize, key: String, msg: String },
    #[error("invalid setting: {0}")]
    Setting(CoreError),
    #[error("physics: {0}")]
    Physics(CoreError),
    #[error("calibration stage `{stage}` infeasible: {msg}")]
    Infeasible { stage: &'static str, msg: String },
    #[error("calibration record {} is missing or unreadable: {reason}", path.display())]
    MissingCalibration { path: PathBuf, reason: String },
    #[error("unknown scenario `{0}` (try `eitsq list-scenarios`)")]
    UnknownScenario(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub(crate) fn config(line: usize, key: &str, msg: impl Into<String>) -> Self {
        Self::Config { line, key: key.to_string(), msg: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Setting(_) | Self::UnknownScenario(_) => 2,
            Self::Physics(_) | Self::Infeasible { .. } => 3,
            Self::MissingCalibration { .. } => 4,
            Self::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::InvalidGrid(_)
            | CoreError::OffGrid(..)
            | CoreError::Nyquist { .. }
            | CoreError::LengthMismatch(..) => Self::Setting(e),
            _ => Self::Physics(e),
        }
    }
}

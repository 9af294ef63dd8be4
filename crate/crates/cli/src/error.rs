use thiserror::Error;

use scanorder::Error as CoreError;

/// A failure tagged with the stage that produced it.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{stage}: {message}")]
    User { stage: String, message: String },

    #[error("{stage}: numerical failure: {source}")]
    Numerical {
        stage: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn user(stage: &str, message: impl Into<String>) -> Self {
        CliError::User {
            stage: stage.into(),
            message: message.into(),
        }
    }

    /// Sorts library errors into bad input and numerical breakdowns.
    pub fn from_core(stage: &str, e: CoreError) -> Self {
        match e {
            CoreError::RowSum { .. }
            | CoreError::NegativeEntry { .. }
            | CoreError::NotStationary(_)
            | CoreError::NotSymmetric(_)
            | CoreError::Eigensolver
            | CoreError::AllConditionalWeightsZero(_) => CliError::Numerical {
                stage: stage.into(),
                source: e,
            },
            other => CliError::user(stage, other.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User { .. } => 1,
            CliError::Numerical { .. } => 2,
        }
    }
}

/// Attaches a stage name to library results.
pub trait Stage<T> {
    fn stage(self, stage: &str) -> Result<T, CliError>;
}

impl<T> Stage<T> for scanorder::Result<T> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(stage, e))
    }
}

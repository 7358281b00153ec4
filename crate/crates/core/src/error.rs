use serde::de::DeserializeOwned;
use thiserror::Error;

use crate::grading::GradingViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input: unknown ids, bad paths, bad parameters.
    #[error("input error: {0}")]
    Input(String),

    /// A grading failed validation where a valid one was required.
    #[error("invalid grading: {0}")]
    Grading(#[from] GradingViolation),

    /// A hypothesis of an operation does not hold; `witness` names the offending object.
    #[error("precondition failed: {message} (witness: {witness})")]
    Precondition { message: String, witness: String },

    /// A lift or distance query left the constructed universal-cover ball.
    #[error("ball too small: {0}")]
    BallTooSmall(String),

    /// An internal invariant was violated. This is a bug, never a user error.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// A JSON document parsed but does not match the expected schema at `path`.
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

/// Deserializes `value`, reporting the JSON path of the first mismatch.
pub fn from_json_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(message: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::Precondition {
            message: message.into(),
            witness: witness.into(),
        }
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Process exit code for the CLI: 1 for internal faults, 2 for everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 1,
            _ => 2,
        }
    }
}

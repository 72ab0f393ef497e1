use std::fmt::Display;

use mixnorm::lab::LabError;
use mixnorm::models::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("validation error at `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn validation(field: &str, reason: impl Display) -> Self {
        CliError::Validation { field: field.to_string(), reason: reason.to_string() }
    }

    pub fn runtime(err: impl Display) -> Self {
        CliError::Runtime(err.to_string())
    }

    pub fn from_model(err: ModelError) -> Self {
        match err {
            ModelError::InvalidModel { field, reason } => CliError::Validation { field, reason },
            ModelError::NotPositiveSemidefinite { .. } => CliError::validation("model.correlation", err),
            other => CliError::validation("model", other),
        }
    }

    pub fn from_lab(err: LabError) -> Self {
        match err {
            LabError::InvalidConfig { field, reason } => CliError::validation(field, reason),
            LabError::Model(e) => CliError::from_model(e),
            LabError::TailSpecMissing => CliError::validation("tail", "missing"),
            LabError::OperatorMissing => CliError::validation("operator", "missing"),
            LabError::Grid(e) => CliError::validation("operator", e),
            other => CliError::validation("experiment", other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation { .. } => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

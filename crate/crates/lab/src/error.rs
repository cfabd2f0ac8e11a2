//! Failure classes and the exit codes they map to.

use serde_json::json;

use crate::config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_UNRELIABLE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{} configuration error(s)", .0.len())]
    Config(Vec<ConfigError>),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    /// Raised by the numerical core. Domain errors are input problems and
    /// map to the configuration exit code.
    #[error(transparent)]
    Numerical(#[from] qrcsl_core::Error),
}

impl LabError {
    pub fn io(path: impl Into<String>, err: impl std::fmt::Display) -> Self {
        LabError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Usage(_) | LabError::Io { .. } => EXIT_CONFIG,
            LabError::Numerical(qrcsl_core::Error::Domain { .. }) => EXIT_CONFIG,
            LabError::Numerical(qrcsl_core::Error::Unreliable(_)) => EXIT_UNRELIABLE,
            LabError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::Usage(_) => "usage",
            LabError::Io { .. } => "io",
            LabError::Numerical(qrcsl_core::Error::Domain { .. }) => "domain",
            LabError::Numerical(qrcsl_core::Error::Accuracy { .. }) => "accuracy",
            LabError::Numerical(qrcsl_core::Error::Positivity(_)) => "positivity",
            LabError::Numerical(qrcsl_core::Error::Unstable(_)) => "stability",
            LabError::Numerical(qrcsl_core::Error::Unreliable(_)) => "unreliable",
            LabError::Numerical(_) => "numerical",
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_record(&self) -> serde_json::Value {
        let details: Vec<serde_json::Value> = match self {
            LabError::Config(errs) => errs
                .iter()
                .map(|e| json!({ "line": e.line, "key": e.key, "message": e.message }))
                .collect(),
            _ => Vec::new(),
        };
        json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "details": details,
        })
    }
}

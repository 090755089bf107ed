use std::fmt;
use std::path::Path;

use serde::Serialize;

/// Failure of one CLI run, rendered as JSON on stderr and into `error.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub module: String,
    pub operation: String,
    pub code: String,
    pub message: String,
    #[serde(skip)]
    pub usage: bool,
}

impl CliError {
    pub fn core(operation: &str, e: impl Into<descry::Error>) -> Self {
        let e = e.into();
        Self {
            module: e.module().into(),
            operation: operation.into(),
            code: e.code().into(),
            message: e.to_string(),
            usage: false,
        }
    }

    pub fn usage(operation: &str, message: impl Into<String>) -> Self {
        Self { module: "cli".into(), operation: operation.into(), code: "UsageError".into(), message: message.into(), usage: true }
    }

    pub fn io(operation: &str, path: &Path, e: impl fmt::Display) -> Self {
        Self {
            module: "cli".into(),
            operation: operation.into(),
            code: "IoError".into(),
            message: format!("{}: {e}", path.display()),
            usage: false,
        }
    }

    pub fn runtime(operation: &str, code: &str, message: impl Into<String>) -> Self {
        Self { module: "cli".into(), operation: operation.into(), code: code.into(), message: message.into(), usage: false }
    }

    pub fn exit_code(&self) -> i32 {
        if self.usage {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("error serialises")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{} [{}]: {}", self.module, self.operation, self.code, self.message)
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;

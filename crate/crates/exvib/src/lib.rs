//! Command-line front end of `exvib-core`: scenario configuration, CSV/JSON
//! artifacts and the `exvib` subcommands.

pub mod cli;
pub mod config;
pub mod output;

use exvib_core::ErrorKind;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Command-line usage error (unknown subcommand or flag, bad flag value).
pub const EXIT_USAGE: i32 = 1;
/// Invalid configuration or model request.
pub const EXIT_CONFIG: i32 = 2;
/// A resource cap (basis size) would be exceeded.
pub const EXIT_RESOURCE: i32 = 3;
/// A numerical method failed to meet its tolerance.
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] exvib_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Model(e) => match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Resource => EXIT_RESOURCE,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            },
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_CONFIG,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Model(e) => match e.kind() {
                ErrorKind::Config => "config",
                ErrorKind::Resource => "resource",
                ErrorKind::Numerical => "numerical",
            },
            CliError::Config(_) => "config",
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "io",
        }
    }

    /// One-line JSON object describing the failure, for stderr.
    pub fn to_line(&self) -> String {
        let fields = match self {
            CliError::Model(e) => e.fields(),
            _ => Vec::new(),
        };
        let message: String = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        serde_json::json!({
            "error": self.category(),
            "exit_code": self.exit_code(),
            "message": message,
            "fields": fields,
        })
        .to_string()
    }
}

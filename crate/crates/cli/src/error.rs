use std::fmt;

/// Failures mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2, with the offending config field.
    Config { field: String, message: String },
    /// Exit code 3.
    Data(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Self::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::Data(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config { field, message } => write!(f, "{field}: {message}"),
            Self::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dialign::Error> for CliError {
    fn from(e: dialign::Error) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Data(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Data(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Data(format!("json error: {e}"))
    }
}

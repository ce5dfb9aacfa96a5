use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}{}: {message}", key.as_deref().map(|k| format!("key `{k}`")).unwrap_or_else(|| "config".into()), line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { key: Option<String>, line: Option<usize>, message: String },
    #[error(transparent)]
    Numeric(#[from] semitrace::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("threads: {0}")]
    Threads(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "ConfigError",
            CliError::Numeric(e) => e.code(),
            CliError::Io { .. } => "IoError",
            CliError::Csv(_) => "CsvError",
            CliError::Threads(_) => "ThreadPoolError",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "code": self.code(), "message": self.to_string() });
        if let CliError::Config { key, line, .. } = self {
            v["key"] = json!(key);
            v["line"] = json!(line);
        }
        json!({ "error": v })
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

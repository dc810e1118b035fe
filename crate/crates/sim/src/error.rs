use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown key '{key}'{}", suggestion.as_ref().map(|s| format!(" (did you mean '{s}'?)")).unwrap_or_default())]
    UnknownKey { key: String, suggestion: Option<String> },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid value '{value}' for key '{key}' (expected {expected})")]
    Value { key: String, value: String, expected: &'static str },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] leakbf::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

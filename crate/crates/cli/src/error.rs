use thiserror::Error;

/// Everything that stops a run before or between checks.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("{field}: {message}")]
    Spec { field: String, message: String },

    #[error("{field}: numerical failure: {message}")]
    Numerical { field: String, message: String },
}

impl CliError {
    pub fn spec(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Spec {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 2 for anything wrong with the input, 3 for numerical breakdowns.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical { .. } => 3,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep only the message
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        CliError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

/// Attach the problem-file field being processed to a core error.
pub fn core_error(field: impl Into<String>) -> impl FnOnce(rqmkit_core::Error) -> CliError {
    let field = field.into();
    move |e| match e {
        rqmkit_core::Error::NumericalFailure(message) => CliError::Numerical { field, message },
        other => CliError::Spec {
            field,
            message: other.to_string(),
        },
    }
}

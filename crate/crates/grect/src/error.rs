use std::fmt;

/// A failure of the command-line front end, carrying the one-word code
/// printed on stderr.
#[derive(Debug)]
pub enum CliError {
    Core(grect_core::Error),
    Config { code: &'static str, message: String },
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Config { code, message: message.into() }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Config { code, .. } => code,
            CliError::Io(_) => "IO",
        }
    }

    /// Every error is reported with status 2; status 1 is reserved for
    /// failing must-pass checks.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config { message, .. } => f.write_str(message),
            CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<grect_core::Error> for CliError {
    fn from(e: grect_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Maps a JSON decoding failure to a code: unknown model kinds and unknown
/// keys get their own codes, everything else is a parse error.
pub fn from_json(e: serde_json::Error, context: &str) -> CliError {
    let text = e.to_string();
    let code = if text.contains("unknown variant") {
        "UNKNOWN_SPEC_KIND"
    } else if text.contains("unknown field") {
        "UNKNOWN_KEY"
    } else {
        "CONFIG_PARSE"
    };
    CliError::config(code, format!("{context}: {text}"))
}

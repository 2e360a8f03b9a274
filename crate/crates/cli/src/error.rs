use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Toml {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("parse error in {location} at offset {position}: expected {expected}, found {found}")]
    Expr {
        location: String,
        position: usize,
        expected: String,
        found: String,
    },
    #[error("semantic error: {0}")]
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Toml { .. } | CliError::Expr { .. } => EXIT_PARSE,
            CliError::Semantic(_) => EXIT_SEMANTIC,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SEMANTIC: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;

use std::fmt;
use std::path::{Path, PathBuf};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_FIT: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_VIOLATION: u8 = 5;

/// Every way a command can fail, each with one exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag values or combinations.
    Usage(String),
    /// Input file content that does not match the schema.
    Parse {
        path: PathBuf,
        line: u64,
        column: Option<usize>,
        message: String,
    },
    /// The library rejected the data or failed to fit.
    Fit(nestspec::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// A theorem-backed check failed; the report was still written.
    Violation(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn parse(path: &Path, line: u64, column: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => EXIT_USAGE,
            CliError::Fit(_) => EXIT_FIT,
            CliError::Io { .. } => EXIT_IO,
            CliError::Violation(_) => EXIT_VIOLATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse {
                path,
                line,
                column,
                message,
            } => match column {
                Some(c) => write!(f, "parse error: {}: line {line}, column {c}: {message}", path.display()),
                None => write!(f, "parse error: {}: line {line}: {message}", path.display()),
            },
            CliError::Fit(e) => write!(f, "fit error: {e}"),
            CliError::Io { path, source } => write!(f, "i/o error: {}: {source}", path.display()),
            CliError::Violation(m) => write!(f, "theorem violation: {m}"),
        }
    }
}

impl From<nestspec::Error> for CliError {
    fn from(e: nestspec::Error) -> Self {
        CliError::Fit(e)
    }
}

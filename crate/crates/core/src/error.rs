use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("empty trace: {0}")]
    EmptyTrace(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("missing capability: {0}")]
    Capability(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("integrity error: checksum {found:#06x} does not match computed {computed:#06x}")]
    Integrity { found: u16, computed: u16 },
    #[error("corrupt store at line {line}: {message}")]
    CorruptStore { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Schema(_) => "schema",
            Error::EmptyTrace(_) => "empty_trace",
            Error::Domain(_) => "domain",
            Error::Capability(_) => "capability",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Numeric(_) => "numeric",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Integrity { .. } => "integrity",
            Error::CorruptStore { .. } => "corrupt_store",
        }
    }
}

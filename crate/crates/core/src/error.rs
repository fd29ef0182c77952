use std::fmt;

/// Location of a failure inside an ingested byte stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    /// 1-based record number (header is record 0 for CSV).
    Row(u64),
    Byte(u64),
    Unknown,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Row(r) => write!(f, "row {r}"),
            Position::Byte(b) => write!(f, "byte {b}"),
            Position::Unknown => f.write_str("unknown position"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ingest error at {position}: {message}")]
    Ingest { position: Position, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("query error: {0}")]
    Query(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn ingest(position: Position, message: impl Into<String>) -> Self {
        Error::Ingest {
            position,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! File formats, report rendering and the command-line front end for
//! `outsideview-core`.

pub mod cli;
pub mod csvio;
pub mod json;
pub mod markdown;

use std::path::PathBuf;

pub use outsideview_core as core;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("row {row}, column `{column}`: {message}")]
    MalformedRow {
        row: usize,
        column: String,
        message: String,
    },
    #[error("row {row}: {source}")]
    InvalidRecord {
        row: usize,
        source: outsideview_core::Error,
    },
    #[error("header: {0}")]
    Header(String),
    #[error("no records")]
    NoRecords,
    #[error(transparent)]
    Core(#[from] outsideview_core::Error),
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// The domain error underneath, if any.
    pub fn core(&self) -> Option<&outsideview_core::Error> {
        match self {
            Error::InvalidRecord { source, .. } | Error::Core(source) => Some(source),
            _ => None,
        }
    }

    /// Process exit code: 2 bad input, 3 too little data, 4 no benchmark.
    pub fn exit_code(&self) -> u8 {
        match self.core() {
            Some(outsideview_core::Error::InsufficientData { .. }) => 3,
            Some(outsideview_core::Error::MissingCoreFindings) => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

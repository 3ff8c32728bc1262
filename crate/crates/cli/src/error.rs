use std::path::PathBuf;

use pelve_core::RiskError;
use thiserror::Error;

/// Problems with an input CSV file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("malformed CSV at line {line}: {reason}")]
    MalformedCsv { line: u64, reason: String },
    #[error("non-positive price {value} at line {line}")]
    NonPositivePrice { line: u64, value: f64 },
    #[error("date {date} at line {line} does not follow the previous date")]
    NonMonotoneDates { line: u64, date: String },
    #[error("need at least {needed} data rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("series has {len} returns, fewer than the window of {window}")]
    SeriesTooShort { len: usize, window: usize },
}

impl CliError {
    /// 1 for usage errors, 2 for data and computation errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            _ => 2,
        }
    }
}

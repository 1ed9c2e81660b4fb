use std::fmt;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// One validation problem, addressed by its dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every problem found in a config document, reported together.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    pub fn single(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            issues: vec![ConfigIssue {
                path: path.into(),
                message: message.into(),
            }],
        }
    }

    pub fn mentions(&self, path: &str) -> bool {
        self.issues.iter().any(|i| i.path == path)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config ({} issue", self.issues.len())?;
        if self.issues.len() != 1 {
            f.write_str("s")?;
        }
        f.write_str(")")?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

/// Dataset problems. Rows count data lines from 1 (the header is row 0).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("{path}: dataset is empty")]
    Empty { path: PathBuf },
    #[error("{path}: bad header: {message}")]
    Header { path: PathBuf, message: String },
    #[error("{path}: row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: row {row}, column {column}: {message}")]
    Cell {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{failed} of {total} runs failed; see the manifest")]
    RunFailures { failed: usize, total: usize },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 config, 3 ingestion, 4 numerical, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Ingest(_) => 3,
            BenchError::Numerical(_) | BenchError::RunFailures { .. } => 4,
            BenchError::Io { .. } => 1,
        }
    }
}

impl From<gpucb::Error> for BenchError {
    fn from(e: gpucb::Error) -> Self {
        match e {
            gpucb::Error::Config(m) | gpucb::Error::Input(m) => {
                BenchError::Config(ConfigError::single("<model>", m))
            }
            gpucb::Error::Ingestion { row, message } => BenchError::Ingest(IngestError::Cell {
                path: PathBuf::new(),
                row,
                column: "value".into(),
                message,
            }),
            other => BenchError::Numerical(other.to_string()),
        }
    }
}

use thiserror::Error;

/// Errors raised by the kernel, posterior, acquisition and environment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed arguments: dimension mismatch, empty pool, bad indices.
    #[error("input error: {0}")]
    Input(String),

    /// Invalid hyperparameters or schedule settings.
    #[error("config error: {0}")]
    Config(String),

    /// A non-positive pivot was met while extending or building a Cholesky factor.
    #[error("cholesky breakdown at pivot {pivot} (pivot value {value:e})")]
    CholeskyBreakdown { pivot: usize, value: f64 },

    /// Any other numerical failure (negative variance, non-finite score, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A tabular dataset row could not be used. Rows are 1-based data rows.
    #[error("ingestion error at row {row}: {message}")]
    Ingestion { row: usize, message: String },
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::CholeskyBreakdown { .. } | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

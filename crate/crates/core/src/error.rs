use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the verification toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input in {context}: {value}")]
    NonFinite { context: String, value: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("network solve failed: residual {residual:e} after {iterations} iterations")]
    NetworkSolve { residual: f64, iterations: usize },

    #[error("singular network admittance at operating point {point:?}")]
    SingularNetwork { point: Vec<f64> },

    #[error("steady-state search failed (residual history {history:?})")]
    SteadyState { history: Vec<f64> },

    #[error("node {node}: {reason}")]
    Graph { node: usize, reason: String },

    #[error("node {node} has no interval annotation; run interval_forward first")]
    MissingAnnotation { node: usize },

    #[error("schema error at `{path}`: {reason}")]
    Schema { path: String, reason: String },

    #[error("{failed} of {total} Monte Carlo samples failed (limit {limit})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        limit: usize,
    },

    #[error("certificate does not enclose the empirical bounds at level {level}")]
    Unsound {
        level: f64,
        report: Box<crate::oracle::ComparisonReport>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(context: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            context: context.to_string(),
            value,
        })
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

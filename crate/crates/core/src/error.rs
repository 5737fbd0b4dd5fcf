use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the demixing library.
#[derive(Debug, Error)]
pub enum DemixError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two nets (or a net and a weight file) disagree structurally.
    #[error("structural error at layer {layer}: {reason}")]
    Structure { layer: usize, reason: String },

    #[error("parse error at `{path}`: {reason}")]
    Parse { path: String, reason: String },

    #[error("unsupported format_version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },

    #[error("net too large: {required} points needed, cap is {cap}")]
    NetTooLarge { required: u64, cap: u64 },

    #[error("net of {cardinality} points exceeds the covering bound exp({bound:.6})")]
    CardinalityBound { cardinality: usize, bound: f64 },

    #[error("{pairs} pairs exceed the cap of {cap}; rerun with pair subsampling and a recorded seed")]
    PairCapExceeded { pairs: u64, cap: u64 },

    #[error("solver diverged in every restart ({restarts} attempted)")]
    Diverged { restarts: usize },

    #[error("missing initialization input: {0}")]
    MissingInit(&'static str),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, DemixError>;

pub(crate) fn dim_check(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(DemixError::Dimension(format!(
            "{what}: expected length {expected}, found {found}"
        )))
    }
}

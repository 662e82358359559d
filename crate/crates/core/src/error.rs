use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("blob generation failed: {0}")]
    Generation(String),

    #[error("stratification failed: {0}")]
    Stratification(String),

    #[error("initial pool seeding failed: {0}")]
    Seeding(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("selection failed: {0}")]
    Selection(String),

    #[error("metric unavailable: {0}")]
    MetricUnavailable(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unsupported schema version {found} (reader supports {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

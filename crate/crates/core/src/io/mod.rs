//! On-disk formats.
//!
//! Matrices travel as CSV (`id,<label>...` header, one record per row).
//! Manifests, fold sets and reports are JSON; everything this crate writes is
//! canonical JSON so repeated runs produce byte-identical files. The JSON
//! Schemas for these documents live in the repository's `schemas/` directory.

mod canonical;
mod matrix_csv;
mod manifest;
mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use canonical::{to_canonical_json, write_canonical};
pub use manifest::{CheckpointEntry, DatasetManifest, MANIFEST_SCHEMA_VERSION};
pub use matrix_csv::{
    parse_label_csv, parse_prediction_csv, read_f1_table, read_label_csv, read_prediction_csv, read_source_weights,
    write_label_csv, write_prediction_csv, F1Table,
};
pub use report::{
    read_fold_set, read_report, write_fold_set, write_report, Aggregate, CheckpointAggregate, FoldRecord, FoldSet,
    ResultReport, Versioned, FOLDS_SCHEMA_VERSION, MELEP_REPORT_SCHEMA_VERSION, REPORT_SCHEMA_VERSION,
};

/// Errors raised while reading or writing data files. Cell-level errors carry
/// the 1-based line number in the file and the 1-based column.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: missing header row (expected `id,<label>,...`)")]
    MissingHeader { path: PathBuf },
    #[error("{path}: header has no label columns")]
    NoLabelColumns { path: PathBuf },
    #[error("{path}: duplicate column `{name}`")]
    DuplicateColumn { path: PathBuf, name: String },
    #[error("{path}: no data rows")]
    NoRecords { path: PathBuf },
    #[error("{path}: row {row} has {found} cells, expected {expected}")]
    RaggedRow { path: PathBuf, row: u64, found: usize, expected: usize },
    #[error("{path}: row {row}, column {col}: `{value}` is not a number")]
    NonNumericCell { path: PathBuf, row: u64, col: usize, value: String },
    #[error("{path}: row {row}, column {col}: {value} is outside [0, 1]")]
    OutOfRange { path: PathBuf, row: u64, col: usize, value: String },
    #[error("{path}: row {row}, column {col}: `{value}` is not 0 or 1")]
    NonBinaryCell { path: PathBuf, row: u64, col: usize, value: String },
    #[error("{path}: row {row}: duplicate record id `{id}`")]
    DuplicateId { path: PathBuf, row: u64, id: String },
    #[error("{path}: row {row}: empty record id")]
    EmptyId { path: PathBuf, row: u64 },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { path: PathBuf, found: u32, expected: u32 },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

impl DataError {
    pub(crate) fn invalid(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        DataError::Invalid { path: path.into(), message: message.into() }
    }
}

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{write_canonical, DataError};
use crate::sampler::{FoldSpec, SamplerConfig};
use crate::stats::{CorrelationResult, DistanceBinning};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const FOLDS_SCHEMA_VERSION: u32 = 1;
pub const MELEP_REPORT_SCHEMA_VERSION: u32 = 1;

/// A serializable value tagged with the schema version of its document.
#[derive(Debug, Clone, Serialize)]
pub struct Versioned<'a, T: Serialize> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: &'a T,
}

/// Outcome of a correlation study: one record per (fold, checkpoint) and the
/// statistics over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultReport {
    pub schema_version: u32,
    pub rng: String,
    pub sampler: SamplerConfig,
    /// Weight cap applied when computing fold MELEP values.
    pub cap: Option<f64>,
    /// `proxy` or `external`.
    pub f1_source: String,
    pub folds: Vec<FoldRecord>,
    /// Absent when there are no folds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoldRecord {
    pub fold_id: usize,
    pub checkpoint_id: String,
    pub selected_label_indices: Vec<usize>,
    pub melep: f64,
    pub weighted_f1: Option<f64>,
    pub clamp_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    /// Over all (fold, checkpoint) points. `None` when the points do not
    /// admit a correlation (too few, or constant).
    pub correlation: Option<CorrelationResult<f64>>,
    pub binning: Option<DistanceBinning<f64>>,
    pub per_checkpoint: Vec<CheckpointAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointAggregate {
    pub checkpoint_id: String,
    pub correlation: Option<CorrelationResult<f64>>,
    pub binning: Option<DistanceBinning<f64>>,
}

/// Sampled folds together with the generator and config that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoldSet {
    pub schema_version: u32,
    pub rng: String,
    pub config: SamplerConfig,
    pub folds: Vec<FoldSpec>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

fn read_versioned<T: DeserializeOwned>(path: &Path, expected: u32) -> Result<T, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
    let probe: VersionProbe =
        serde_json::from_str(&text).map_err(|source| DataError::Json { path: path.to_path_buf(), source })?;
    if probe.schema_version != expected {
        return Err(DataError::SchemaVersion { path: path.to_path_buf(), found: probe.schema_version, expected });
    }
    serde_json::from_str(&text).map_err(|source| DataError::Json { path: path.to_path_buf(), source })
}

pub fn write_report(report: &ResultReport, path: impl AsRef<Path>) -> Result<(), DataError> {
    write_canonical(path, report)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ResultReport, DataError> {
    read_versioned(path.as_ref(), REPORT_SCHEMA_VERSION)
}

pub fn write_fold_set(folds: &FoldSet, path: impl AsRef<Path>) -> Result<(), DataError> {
    write_canonical(path, folds)
}

pub fn read_fold_set(path: impl AsRef<Path>) -> Result<FoldSet, DataError> {
    read_versioned(path.as_ref(), FOLDS_SCHEMA_VERSION)
}

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_label_csv, read_prediction_csv, DataError};
use crate::matrix::{LabelMatrix, PredictionMatrix};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// A target dataset and the prediction files of candidate checkpoints on it.
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub name: String,
    pub labels_path: String,
    pub predictions: Vec<CheckpointEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointEntry {
    pub checkpoint_id: String,
    pub path: String,
    pub source_label_names: Vec<String>,
}

impl DatasetManifest {
    /// Reads and structurally validates a manifest. Referenced files are
    /// checked when loaded.
    pub fn read(path: impl AsRef<Path>) -> Result<(Self, PathBuf), DataError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
        let manifest: Self =
            serde_json::from_str(&text).map_err(|source| DataError::Json { path: path.to_path_buf(), source })?;
        manifest.validate(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((manifest, base))
    }

    pub fn validate(&self, path: &Path) -> Result<(), DataError> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(DataError::SchemaVersion {
                path: path.to_path_buf(),
                found: self.schema_version,
                expected: MANIFEST_SCHEMA_VERSION,
            });
        }
        if self.predictions.is_empty() {
            return Err(DataError::invalid(path, "manifest lists no checkpoints"));
        }
        let mut ids = HashSet::new();
        for entry in &self.predictions {
            if !ids.insert(entry.checkpoint_id.as_str()) {
                return Err(DataError::invalid(path, format!("duplicate checkpoint_id `{}`", entry.checkpoint_id)));
            }
            if entry.source_label_names.is_empty() {
                return Err(DataError::invalid(
                    path,
                    format!("checkpoint `{}` has an empty source label list", entry.checkpoint_id),
                ));
            }
            let mut names = HashSet::new();
            for name in &entry.source_label_names {
                if !names.insert(name.as_str()) {
                    return Err(DataError::invalid(
                        path,
                        format!("checkpoint `{}` lists source label `{name}` twice", entry.checkpoint_id),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(base: &Path, relative: &str) -> PathBuf {
        let p = Path::new(relative);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    pub fn load_labels(&self, base: &Path) -> Result<LabelMatrix, DataError> {
        read_label_csv(Self::resolve(base, &self.labels_path))
    }
}

impl CheckpointEntry {
    /// Loads the checkpoint's predictions, checks the header against the
    /// declared source labels and reorders rows to match `labels` by id.
    pub fn load(&self, base: &Path, labels: &LabelMatrix) -> Result<PredictionMatrix<f64>, DataError> {
        let path = DatasetManifest::resolve(base, &self.path);
        let preds = read_prediction_csv(&path)?;
        if preds.source_label_names() != self.source_label_names.as_slice() {
            return Err(DataError::invalid(
                &path,
                format!(
                    "columns {:?} do not match the manifest's source labels {:?} for checkpoint `{}`",
                    preds.source_label_names(),
                    self.source_label_names,
                    self.checkpoint_id
                ),
            ));
        }
        preds.align_to(labels.record_ids()).map_err(|e| DataError::invalid(&path, e.to_string()))
    }
}

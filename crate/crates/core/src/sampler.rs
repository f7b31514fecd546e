//! Target task construction.
//!
//! Each fold picks a random subset of sufficiently common labels, keeps the
//! records with at least one positive among them, draws a fixed number of
//! those records without replacement and splits them into train and test
//! parts. Everything is driven by one seeded ChaCha8 stream, consumed in fold
//! order, so the same labels and config always give the same folds.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::LabelMatrix;

/// Generator identification written alongside sampled folds.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("no label has at least {0} positive records")]
    NoEligibleLabels(usize),
    #[error("label_count_max ({max}) exceeds the number of eligible labels ({eligible})")]
    TooFewEligible { max: usize, eligible: usize },
    #[error("fold {fold_id}: fewer than {needed} records have a positive among the selected labels after {attempts} attempts")]
    InsufficientRecords { fold_id: usize, needed: usize, attempts: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub label_count_min: usize,
    pub label_count_max: usize,
    pub fold_size: usize,
    pub fold_count: usize,
    pub train_fraction: f64,
    pub min_label_positives: usize,
    pub seed: u64,
    pub max_retries: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            label_count_min: 2,
            label_count_max: 10,
            fold_size: 1000,
            fold_count: 100,
            train_fraction: 0.7,
            min_label_positives: 1000,
            seed: 0,
            max_retries: 20,
        }
    }
}

impl SamplerConfig {
    /// Records per fold that go to the training split, rounded half up.
    pub fn train_size(&self) -> usize {
        (self.train_fraction * self.fold_size as f64 + 0.5).floor() as usize
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |msg: String| Err(SamplerError::InvalidConfig(msg));
        if self.label_count_min < 2 {
            return bad(format!("label_count_min must be at least 2 (got {})", self.label_count_min));
        }
        if self.label_count_min > self.label_count_max {
            return bad(format!(
                "label_count_min ({}) exceeds label_count_max ({})",
                self.label_count_min, self.label_count_max
            ));
        }
        if self.fold_size < 2 {
            return bad(format!("fold_size must be at least 2 (got {})", self.fold_size));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie strictly between 0 and 1 (got {})", self.train_fraction));
        }
        let train = self.train_size();
        if train == 0 || train == self.fold_size {
            return bad(format!(
                "train_fraction {} leaves an empty split for fold_size {}",
                self.train_fraction, self.fold_size
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub fold_id: usize,
    /// Target label columns, ascending.
    pub selected_label_indices: Vec<usize>,
    /// Zero-based row indices into the label matrix, ascending.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Labels with at least `min_positives` positive records, ascending.
pub fn eligible_labels(labels: &LabelMatrix, min_positives: usize) -> Vec<usize> {
    (0..labels.y()).filter(|&y| labels.positives(y) >= min_positives).collect()
}

pub fn sample_folds(labels: &LabelMatrix, config: &SamplerConfig) -> Result<Vec<FoldSpec>, SamplerError> {
    config.validate()?;
    if config.fold_count == 0 {
        return Ok(Vec::new());
    }
    let eligible = eligible_labels(labels, config.min_label_positives);
    if eligible.is_empty() {
        return Err(SamplerError::NoEligibleLabels(config.min_label_positives));
    }
    if config.label_count_max > eligible.len() {
        return Err(SamplerError::TooFewEligible { max: config.label_count_max, eligible: eligible.len() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let train_size = config.train_size();
    let mut folds = Vec::with_capacity(config.fold_count);
    for fold_id in 0..config.fold_count {
        let label_count = rng.random_range(config.label_count_min..=config.label_count_max);
        let mut fold = None;
        for _ in 0..=config.max_retries {
            let mut selected: Vec<usize> =
                index::sample(&mut rng, eligible.len(), label_count).into_iter().map(|k| eligible[k]).collect();
            selected.sort_unstable();
            let candidates: Vec<usize> = (0..labels.n())
                .filter(|&i| selected.iter().any(|&y| labels.get(i, y)))
                .collect();
            if candidates.len() < config.fold_size {
                continue;
            }
            let drawn: Vec<usize> = index::sample(&mut rng, candidates.len(), config.fold_size)
                .into_iter()
                .map(|k| candidates[k])
                .collect();
            let mut train_rows = drawn[..train_size].to_vec();
            let mut test_rows = drawn[train_size..].to_vec();
            train_rows.sort_unstable();
            test_rows.sort_unstable();
            fold = Some(FoldSpec { fold_id, selected_label_indices: selected, train_rows, test_rows });
            break;
        }
        match fold {
            Some(f) => folds.push(f),
            None => {
                return Err(SamplerError::InsufficientRecords {
                    fold_id,
                    needed: config.fold_size,
                    attempts: config.max_retries + 1,
                })
            }
        }
    }
    Ok(folds)
}

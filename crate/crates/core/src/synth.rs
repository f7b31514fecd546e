//! Synthetic multi-label worlds and checkpoints.
//!
//! Records are points in a latent space. Target labels are half-spaces of
//! that space. A synthetic checkpoint predicts its own source labels through
//! a logistic link over directions that interpolate between a copy of a
//! target label's half-space (`alignment = 1`) and an unrelated random
//! direction (`alignment = 0`), with optional Gaussian noise. This gives a
//! stand-in for pre-trained models whose transferability is known by
//! construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{LabelMatrix, MatrixError, PredictionMatrix};
use crate::metric::{EmpiricalPredictor, MetricError};
use crate::stats::{f1_report, StatsError};

/// Generated probabilities are kept this far away from 0 and 1.
pub const PROBABILITY_MARGIN: f64 = 1e-12;

/// Binarization threshold of the downstream proxy; ties count as positive.
pub const PROXY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error("target label {label} could not be given both positive and negative records after {attempts} attempts")]
    DegenerateLabel { label: usize, attempts: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub seed: u64,
    pub latent_dim: usize,
    /// Target label directions are confined to the first `label_rank`
    /// latent coordinates, which correlates the labels with each other.
    /// `None` uses the whole latent space.
    pub label_rank: Option<usize>,
    pub record_count: usize,
    pub label_count: usize,
    /// Per-label positive rate is drawn uniformly from this range.
    pub prevalence_min: f64,
    pub prevalence_max: f64,
    pub max_retries: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            latent_dim: 8,
            label_rank: None,
            record_count: 1000,
            label_count: 5,
            prevalence_min: 0.2,
            prevalence_max: 0.5,
            max_retries: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticWorld {
    pub seed: u64,
    pub latent_dim: usize,
    pub record_count: usize,
    /// `record_count x latent_dim`
    pub latents: Vec<Vec<f64>>,
    /// One direction per target label.
    pub target_directions: Vec<Vec<f64>>,
    pub thresholds: Vec<f64>,
}

impl SyntheticWorld {
    pub fn label_count(&self) -> usize {
        self.thresholds.len()
    }

    pub fn record_ids(&self) -> Vec<String> {
        record_ids(self.record_count)
    }
}

fn record_ids(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("r{i:0width$}")).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn logistic(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

pub fn generate_world(config: &WorldConfig) -> Result<(SyntheticWorld, LabelMatrix), SynthError> {
    if config.latent_dim == 0 {
        return Err(SynthError::InvalidConfig("latent_dim must be at least 1".into()));
    }
    let rank = config.label_rank.unwrap_or(config.latent_dim);
    if rank == 0 || rank > config.latent_dim {
        return Err(SynthError::InvalidConfig("label_rank must be between 1 and latent_dim".into()));
    }
    if config.record_count < 4 {
        return Err(SynthError::InvalidConfig("record_count must be at least 4".into()));
    }
    if config.label_count == 0 {
        return Err(SynthError::InvalidConfig("label_count must be at least 1".into()));
    }
    if !(0.0 < config.prevalence_min && config.prevalence_min <= config.prevalence_max && config.prevalence_max < 1.0)
    {
        return Err(SynthError::InvalidConfig("prevalence range must satisfy 0 < min <= max < 1".into()));
    }

    let n = config.record_count;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let latents: Vec<Vec<f64>> =
        (0..n).map(|_| (0..config.latent_dim).map(|_| rng.sample(StandardNormal)).collect()).collect();

    let mut target_directions = Vec::with_capacity(config.label_count);
    let mut thresholds = Vec::with_capacity(config.label_count);
    let mut columns = Vec::with_capacity(config.label_count);
    for label in 0..config.label_count {
        let mut accepted = None;
        for _ in 0..=config.max_retries {
            let mut direction = unit_vector(&mut rng, rank);
            direction.resize(config.latent_dim, 0.0);
            let prevalence = rng.random_range(config.prevalence_min..=config.prevalence_max);
            let positives = ((prevalence * n as f64).round() as usize).clamp(1, n - 1);
            let scores: Vec<f64> = latents.iter().map(|x| dot(&direction, x)).collect();
            let mut sorted = scores.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
            let cut = n - positives;
            let threshold = 0.5 * (sorted[cut - 1] + sorted[cut]);
            let column: Vec<bool> = scores.iter().map(|&s| s > threshold).collect();
            let count = column.iter().filter(|&&b| b).count();
            if count > 0 && count < n {
                accepted = Some((direction, threshold, column));
                break;
            }
        }
        let (direction, threshold, column) =
            accepted.ok_or(SynthError::DegenerateLabel { label, attempts: config.max_retries + 1 })?;
        target_directions.push(direction);
        thresholds.push(threshold);
        columns.push(column);
    }

    let rows = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let names = (0..config.label_count).map(|y| format!("label{y}")).collect();
    let labels = LabelMatrix::new(record_ids(n), names, rows)?;
    let world = SyntheticWorld {
        seed: config.seed,
        latent_dim: config.latent_dim,
        record_count: n,
        latents,
        target_directions,
        thresholds,
    };
    Ok((world, labels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointConfig {
    pub id: String,
    pub alignment: f64,
    pub noise_sigma: f64,
    /// Defaults to the world's label count.
    #[serde(default)]
    pub source_label_count: Option<usize>,
    #[serde(default = "default_gain")]
    pub gain: f64,
    /// Defaults to a value derived from the world seed and checkpoint position.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_gain() -> f64 {
    4.0
}

impl CheckpointConfig {
    pub fn new(id: impl Into<String>, alignment: f64, noise_sigma: f64) -> Self {
        Self { id: id.into(), alignment, noise_sigma, source_label_count: None, gain: default_gain(), seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticCheckpoint {
    pub checkpoint_id: String,
    pub alignment: f64,
    pub noise_sigma: f64,
    pub gain: f64,
    pub seed: u64,
    pub source_directions: Vec<Vec<f64>>,
    pub source_offsets: Vec<f64>,
}

impl SyntheticCheckpoint {
    pub fn source_label_count(&self) -> usize {
        self.source_directions.len()
    }

    pub fn source_label_names(&self) -> Vec<String> {
        (0..self.source_label_count()).map(|z| format!("src{z}")).collect()
    }
}

/// Derives the checkpoint's source functionals from the world.
///
/// Source label `z` mirrors target label `z mod Y`: its direction is
/// `alignment * target + (1 - alignment) * random` and its offset is
/// `alignment * threshold`, both divided by the length of that direction, so
/// `alignment = 1` copies the target exactly.
pub fn build_checkpoint(
    world: &SyntheticWorld,
    config: &CheckpointConfig,
    seed: u64,
) -> Result<SyntheticCheckpoint, SynthError> {
    if !(0.0..=1.0).contains(&config.alignment) {
        return Err(SynthError::InvalidConfig(format!("checkpoint `{}`: alignment must be in [0, 1]", config.id)));
    }
    if !(config.noise_sigma >= 0.0 && config.noise_sigma.is_finite()) {
        return Err(SynthError::InvalidConfig(format!(
            "checkpoint `{}`: noise_sigma must be finite and nonnegative",
            config.id
        )));
    }
    if !(config.gain > 0.0 && config.gain.is_finite()) {
        return Err(SynthError::InvalidConfig(format!("checkpoint `{}`: gain must be positive", config.id)));
    }
    let z_count = config.source_label_count.unwrap_or(world.label_count());
    if z_count == 0 {
        return Err(SynthError::InvalidConfig(format!("checkpoint `{}`: needs at least one source label", config.id)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = config.alignment;
    let mut source_directions = Vec::with_capacity(z_count);
    let mut source_offsets = Vec::with_capacity(z_count);
    for z in 0..z_count {
        let y = z % world.label_count();
        let random = unit_vector(&mut rng, world.latent_dim);
        let mut direction: Vec<f64> =
            world.target_directions[y].iter().zip(&random).map(|(t, r)| a * t + (1.0 - a) * r).collect();
        // Rescale to unit length so that alignment moves the angle only.
        let norm = dot(&direction, &direction).sqrt();
        let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        direction.iter_mut().for_each(|v| *v *= scale);
        source_directions.push(direction);
        source_offsets.push(a * world.thresholds[y] * scale);
    }
    Ok(SyntheticCheckpoint {
        checkpoint_id: config.id.clone(),
        alignment: a,
        noise_sigma: config.noise_sigma,
        gain: config.gain,
        seed,
        source_directions,
        source_offsets,
    })
}

/// The checkpoint's probabilities over its source labels for every record of
/// the world.
pub fn generate_predictions(
    world: &SyntheticWorld,
    checkpoint: &SyntheticCheckpoint,
) -> Result<PredictionMatrix<f64>, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(checkpoint.seed);
    rng.set_stream(1);
    let rows = world
        .latents
        .iter()
        .map(|x| {
            checkpoint
                .source_directions
                .iter()
                .zip(&checkpoint.source_offsets)
                .map(|(d, &offset)| {
                    let noise: f64 = rng.sample(StandardNormal);
                    let v = checkpoint.gain * (dot(d, x) - offset) + checkpoint.noise_sigma * noise;
                    logistic(v).clamp(PROBABILITY_MARGIN, 1.0 - PROBABILITY_MARGIN)
                })
                .collect()
        })
        .collect();
    Ok(PredictionMatrix::new(world.record_ids(), checkpoint.source_label_names(), rows)?)
}

/// Stand-in for fine-tuning: fits the empirical predictor on the training
/// split, predicts the test split (mean over source labels, positive when
/// at least [`PROXY_THRESHOLD`]) and returns the weighted average F1.
pub fn downstream_f1_proxy(
    preds_train: &PredictionMatrix<f64>,
    labels_train: &LabelMatrix,
    preds_test: &PredictionMatrix<f64>,
    labels_test: &LabelMatrix,
) -> Result<f64, SynthError> {
    let predictor = EmpiricalPredictor::fit(preds_train, labels_train)?;
    if predictor.target_count() != labels_test.y() {
        return Err(SynthError::InvalidConfig(format!(
            "train split has {} target labels, test split has {}",
            predictor.target_count(),
            labels_test.y()
        )));
    }
    let proba = predictor.predict_proba(preds_test)?;
    let rows = proba.into_iter().map(|row| row.into_iter().map(|p| p >= PROXY_THRESHOLD).collect()).collect();
    let predicted = LabelMatrix::new(
        labels_test.record_ids().to_vec(),
        labels_test.target_label_names().to_vec(),
        rows,
    )?;
    Ok(f1_report::<f64>(labels_test, &predicted)?.weighted_f1)
}

/// Synthetic bench description consumed by the `synth` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub world: WorldConfig,
    pub checkpoints: Vec<CheckpointConfig>,
}

impl SynthConfig {
    /// Seed used for the checkpoint at `position` when none is given.
    pub fn checkpoint_seed(&self, position: usize) -> u64 {
        self.checkpoints[position]
            .seed
            .unwrap_or_else(|| derived_seed(self.world.seed, position))
    }
}

pub fn derived_seed(world_seed: u64, position: usize) -> u64 {
    world_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((position as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

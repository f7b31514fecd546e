//! Checkpoint ranking and fold-based correlation studies.
//!
//! These pipelines sit on top of the metric, sampler, synthetic and IO
//! modules and are what the command line front end runs.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::io::{
    write_label_csv, write_prediction_csv, Aggregate, CheckpointAggregate, CheckpointEntry, DataError,
    DatasetManifest, F1Table, FoldRecord, ResultReport, MANIFEST_SCHEMA_VERSION, REPORT_SCHEMA_VERSION,
};
use crate::matrix::{LabelMatrix, MatrixError, PredictionMatrix};
use crate::metric::{compute_melep, MelepOptions, MelepReport, MetricError};
use crate::sampler::{sample_folds, FoldSpec, SamplerConfig, SamplerError, RNG_ALGORITHM};
use crate::stats::{bin_by_distance, pearson, BinningMode};
use crate::synth::{build_checkpoint, downstream_f1_proxy, generate_predictions, generate_world, SynthConfig, SynthError};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("checkpoint `{checkpoint_id}`, fold {fold_id}: {source}")]
    Fold {
        fold_id: usize,
        checkpoint_id: String,
        #[source]
        source: Box<StudyError>,
    },
    #[error("checkpoint `{checkpoint_id}`: {source}")]
    Checkpoint {
        checkpoint_id: String,
        #[source]
        source: Box<StudyError>,
    },
    #[error("no external F1 for fold {fold_id}, checkpoint `{checkpoint_id}`")]
    MissingF1 { fold_id: usize, checkpoint_id: String },
    #[error("checkpoint `{0}` appears twice")]
    DuplicateCheckpoint(String),
    #[error("checkpoint `{id}` has {found} records, labels have {expected}")]
    RecordCount { id: String, found: usize, expected: usize },
}

/// A candidate checkpoint, represented by its predictions on the target
/// records (rows aligned with the label matrix).
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub id: String,
    pub predictions: PredictionMatrix<f64>,
}

fn sorted_checkpoints<'a>(checkpoints: &'a [Checkpoint], labels: &LabelMatrix) -> Result<Vec<&'a Checkpoint>, StudyError> {
    let mut sorted: Vec<&Checkpoint> = checkpoints.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in sorted.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(StudyError::DuplicateCheckpoint(pair[0].id.clone()));
        }
    }
    for c in &sorted {
        if c.predictions.n() != labels.n() {
            return Err(StudyError::RecordCount { id: c.id.clone(), found: c.predictions.n(), expected: labels.n() });
        }
    }
    Ok(sorted)
}

pub const TIE_BREAK: &str = "equal melep values are ordered by checkpoint_id ascending";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub checkpoint_id: String,
    pub melep: f64,
    /// Set when this row's MELEP equals the previous row's.
    pub tied_with_previous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCheckpoint {
    pub checkpoint_id: String,
    pub report: MelepReport<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub schema_version: u32,
    pub tie_break: String,
    pub ranking: Vec<RankRow>,
    pub reports: Vec<RankedCheckpoint>,
}

/// Scores every checkpoint on the full target set and orders them from most
/// to least transferable (ascending MELEP).
pub fn rank_checkpoints(
    checkpoints: &[Checkpoint],
    labels: &LabelMatrix,
    options: &MelepOptions<f64>,
) -> Result<Ranking, StudyError> {
    let sorted = sorted_checkpoints(checkpoints, labels)?;
    let mut scored: Vec<RankedCheckpoint> = sorted
        .par_iter()
        .map(|c| {
            let report = compute_melep(&c.predictions, labels, options).map_err(|e| StudyError::Checkpoint {
                checkpoint_id: c.id.clone(),
                source: Box::new(e.into()),
            })?;
            Ok(RankedCheckpoint { checkpoint_id: c.id.clone(), report })
        })
        .collect::<Result<_, StudyError>>()?;
    scored.sort_by(|a, b| {
        a.report
            .melep
            .total_cmp(&b.report.melep)
            .then_with(|| a.checkpoint_id.cmp(&b.checkpoint_id))
    });
    let ranking = scored
        .iter()
        .enumerate()
        .map(|(k, c)| RankRow {
            rank: k + 1,
            checkpoint_id: c.checkpoint_id.clone(),
            melep: c.report.melep,
            tied_with_previous: k > 0 && scored[k - 1].report.melep.total_cmp(&c.report.melep) == Ordering::Equal,
        })
        .collect();
    Ok(Ranking { schema_version: 1, tie_break: TIE_BREAK.into(), ranking, reports: scored })
}

/// Where downstream F1 values come from.
#[derive(Debug, Clone)]
pub enum F1Source {
    /// Empirical predictor fitted on the train split, scored on the test split.
    Proxy,
    /// Measured elsewhere (e.g. real fine-tuning), keyed by fold and checkpoint.
    External(F1Table),
}

#[derive(Debug, Clone, Default)]
pub struct StudyOptions {
    pub cap: Option<f64>,
    pub binning: BinningMode,
}

fn evaluate_fold(
    fold: &FoldSpec,
    checkpoint: &Checkpoint,
    labels: &LabelMatrix,
    f1_source: &F1Source,
    options: &MelepOptions<f64>,
) -> Result<FoldRecord, StudyError> {
    let task = labels.select_columns(&fold.selected_label_indices)?;
    let labels_train = task.select_rows(&fold.train_rows)?;
    let preds_train = checkpoint.predictions.select_rows(&fold.train_rows)?;
    let report = compute_melep(&preds_train, &labels_train, options)?;
    let weighted_f1 = match f1_source {
        F1Source::Proxy => {
            let labels_test = task.select_rows(&fold.test_rows)?;
            let preds_test = checkpoint.predictions.select_rows(&fold.test_rows)?;
            downstream_f1_proxy(&preds_train, &labels_train, &preds_test, &labels_test)?
        }
        F1Source::External(table) => *table
            .get(&(fold.fold_id, checkpoint.id.clone()))
            .ok_or_else(|| StudyError::MissingF1 { fold_id: fold.fold_id, checkpoint_id: checkpoint.id.clone() })?,
    };
    Ok(FoldRecord {
        fold_id: fold.fold_id,
        checkpoint_id: checkpoint.id.clone(),
        selected_label_indices: fold.selected_label_indices.clone(),
        melep: report.melep,
        weighted_f1: Some(weighted_f1),
        clamp_events: report.clamp_events,
    })
}

fn summarize(records: &[&FoldRecord], mode: BinningMode) -> (Option<crate::stats::CorrelationResult<f64>>, Option<crate::stats::DistanceBinning<f64>>) {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        records.iter().filter_map(|r| r.weighted_f1.map(|f| (r.melep, f))).unzip();
    (pearson(&xs, &ys).ok(), bin_by_distance(&xs, &ys, mode).ok())
}

/// Evaluates the given folds: MELEP on each fold's train split, F1 on its
/// test split, then correlation and distance binning over all points.
pub fn evaluate_folds(
    labels: &LabelMatrix,
    checkpoints: &[Checkpoint],
    folds: &[FoldSpec],
    sampler: &SamplerConfig,
    f1_source: &F1Source,
    options: &StudyOptions,
) -> Result<ResultReport, StudyError> {
    let sorted = sorted_checkpoints(checkpoints, labels)?;
    let melep_options = MelepOptions { cap: options.cap, source_weights: None };
    let jobs: Vec<(&FoldSpec, &Checkpoint)> =
        folds.iter().flat_map(|f| sorted.iter().map(move |&c| (f, c))).collect();
    let records: Vec<FoldRecord> = jobs
        .par_iter()
        .map(|&(fold, ckpt)| {
            evaluate_fold(fold, ckpt, labels, f1_source, &melep_options).map_err(|e| StudyError::Fold {
                fold_id: fold.fold_id,
                checkpoint_id: ckpt.id.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;

    let aggregate = (!records.is_empty()).then(|| {
        let all: Vec<&FoldRecord> = records.iter().collect();
        let (correlation, binning) = summarize(&all, options.binning);
        let per_checkpoint = sorted
            .iter()
            .map(|c| {
                let mine: Vec<&FoldRecord> = records.iter().filter(|r| r.checkpoint_id == c.id).collect();
                let (correlation, binning) = summarize(&mine, options.binning);
                CheckpointAggregate { checkpoint_id: c.id.clone(), correlation, binning }
            })
            .collect();
        Aggregate { correlation, binning, per_checkpoint }
    });

    Ok(ResultReport {
        schema_version: REPORT_SCHEMA_VERSION,
        rng: RNG_ALGORITHM.into(),
        sampler: sampler.clone(),
        cap: options.cap,
        f1_source: match f1_source {
            F1Source::Proxy => "proxy".into(),
            F1Source::External(_) => "external".into(),
        },
        folds: records,
        aggregate,
    })
}

/// Samples folds from `labels` and evaluates them.
pub fn run_study(
    labels: &LabelMatrix,
    checkpoints: &[Checkpoint],
    sampler: &SamplerConfig,
    f1_source: &F1Source,
    options: &StudyOptions,
) -> Result<(Vec<FoldSpec>, ResultReport), StudyError> {
    let folds = sample_folds(labels, sampler)?;
    let report = evaluate_folds(labels, checkpoints, &folds, sampler, f1_source, options)?;
    Ok((folds, report))
}

/// Generates a synthetic world and its checkpoints in memory.
pub fn build_synthetic_bench(config: &SynthConfig) -> Result<(LabelMatrix, Vec<Checkpoint>), StudyError> {
    let (world, labels) = generate_world(&config.world)?;
    let checkpoints = config
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let ckpt = build_checkpoint(&world, c, config.checkpoint_seed(k))?;
            Ok(Checkpoint { id: c.id.clone(), predictions: generate_predictions(&world, &ckpt)? })
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    Ok((labels, checkpoints))
}

fn valid_file_stem(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')) && id != "." && id != ".."
}

/// Writes a synthetic bench as a labels CSV, one prediction CSV per
/// checkpoint and a manifest tying them together. Returns the written paths,
/// manifest last.
pub fn write_synthetic_bench(config: &SynthConfig, out_dir: &Path) -> Result<Vec<PathBuf>, StudyError> {
    for c in &config.checkpoints {
        if !valid_file_stem(&c.id) {
            return Err(SynthError::InvalidConfig(format!(
                "checkpoint id `{}` must be non-empty and use only letters, digits, `-`, `_` or `.`",
                c.id
            ))
            .into());
        }
    }
    let (labels, checkpoints) = build_synthetic_bench(config)?;
    if checkpoints.is_empty() {
        return Err(SynthError::InvalidConfig("at least one checkpoint is required".into()).into());
    }
    std::fs::create_dir_all(out_dir).map_err(|source| DataError::Io { path: out_dir.to_path_buf(), source })?;

    let mut written = Vec::new();
    let labels_name = "labels.csv";
    write_label_csv(out_dir.join(labels_name), &labels)?;
    written.push(out_dir.join(labels_name));
    let mut entries = Vec::new();
    for c in &checkpoints {
        let file = format!("preds_{}.csv", c.id);
        write_prediction_csv(out_dir.join(&file), &c.predictions)?;
        written.push(out_dir.join(&file));
        entries.push(CheckpointEntry {
            checkpoint_id: c.id.clone(),
            path: file,
            source_label_names: c.predictions.source_label_names().to_vec(),
        });
    }
    let manifest = DatasetManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        name: config.name.clone().unwrap_or_else(|| "synthetic".into()),
        labels_path: labels_name.into(),
        predictions: entries,
    };
    let manifest_path = out_dir.join("manifest.json");
    crate::io::write_canonical(&manifest_path, &manifest)?;
    written.push(manifest_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ckpt(id: &str, rows: Vec<Vec<f64>>) -> Checkpoint {
        Checkpoint { id: id.into(), predictions: PredictionMatrix::from_rows(rows).unwrap() }
    }

    #[test]
    fn ranking_orders_and_breaks_ties() {
        let labels = LabelMatrix::from_rows(vec![vec![1], vec![0], vec![1], vec![0]]).unwrap();
        let good = vec![vec![0.9], vec![0.1], vec![0.8], vec![0.2]];
        let flat = vec![vec![0.5]; 4];
        let cps = vec![ckpt("zeta", flat.clone()), ckpt("alpha", flat), ckpt("best", good)];
        let ranking = rank_checkpoints(&cps, &labels, &MelepOptions::default()).unwrap();
        let order: Vec<&str> = ranking.ranking.iter().map(|r| r.checkpoint_id.as_str()).collect();
        assert_eq!(order, vec!["best", "alpha", "zeta"]);
        assert!(ranking.ranking[2].tied_with_previous);
        assert!(!ranking.ranking[1].tied_with_previous);
        assert_eq!(ranking.ranking[0].rank, 1);
    }

    #[test]
    fn duplicate_checkpoints_rejected() {
        let labels = LabelMatrix::from_rows(vec![vec![1], vec![0]]).unwrap();
        let cps = vec![ckpt("a", vec![vec![0.5]; 2]), ckpt("a", vec![vec![0.4]; 2])];
        assert!(matches!(
            rank_checkpoints(&cps, &labels, &MelepOptions::default()),
            Err(StudyError::DuplicateCheckpoint(_))
        ));
    }

    #[test]
    fn file_stems() {
        assert!(valid_file_stem("ckpt-1.v2"));
        assert!(!valid_file_stem("../evil"));
        assert!(!valid_file_stem(""));
        assert!(!valid_file_stem(".."));
    }
}

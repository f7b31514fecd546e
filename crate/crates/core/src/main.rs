use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use melep::io::{
    read_f1_table, read_label_csv, read_prediction_csv, read_source_weights, to_canonical_json, write_fold_set,
    DataError, DatasetManifest, FoldSet, Versioned, FOLDS_SCHEMA_VERSION, MELEP_REPORT_SCHEMA_VERSION,
};
use melep::metric::{compute_melep, MelepOptions};
use melep::sampler::{SamplerConfig, RNG_ALGORITHM};
use melep::stats::BinningMode;
use melep::study::{rank_checkpoints, run_study, write_synthetic_bench, Checkpoint, F1Source, StudyOptions};
use melep::synth::SynthConfig;
use melep::LabelMatrix;

const THREADS_VAR: &str = "MELEP_THREADS";

/// Transferability estimation for multi-label checkpoints.
#[derive(Parser)]
#[command(name = "melep", version, about, after_help = "Set MELEP_THREADS to limit the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute MELEP for one prediction matrix against target labels.
    Compute(ComputeArgs),
    /// Score every checkpoint in a manifest and order them, best first.
    Rank(RankArgs),
    /// Sample folds and correlate fold MELEP with downstream F1.
    Study(StudyArgs),
    /// Generate a synthetic labels file, prediction files and manifest.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// Predictions CSV (`id,<source label>...`).
    #[arg(long)]
    preds: PathBuf,
    /// Labels CSV (`id,<target label>...`).
    #[arg(long)]
    labels: PathBuf,
    /// Upper bound on target label weights.
    #[arg(long)]
    cap: Option<f64>,
    /// CSV with columns `label,weight` giving a weight per source label.
    #[arg(long)]
    source_weights: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Labels CSV; defaults to the manifest's `labels_path`.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("f1_source").args(["proxy", "f1"]).multiple(false))]
struct StudyArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Labels CSV; defaults to the manifest's `labels_path`.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Sampler configuration (JSON).
    #[arg(long)]
    sampler_config: PathBuf,
    /// Score each fold with the empirical-predictor proxy.
    #[arg(long)]
    proxy: bool,
    /// CSV with columns `fold_id,checkpoint_id,weighted_f1`.
    #[arg(long)]
    f1: Option<PathBuf>,
    /// Distance-level bin edges: `equal-width` or `quantile`.
    #[arg(long, default_value = "equal-width")]
    binning: BinningMode,
    #[arg(long)]
    cap: Option<f64>,
    /// Also write the sampled folds here.
    #[arg(long)]
    folds_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Synthetic bench configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

fn data(err: impl std::fmt::Display) -> Failure {
    Failure::Data(err.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| data(DataError::Io { path: path.to_path_buf(), source }))?;
    serde_json::from_str(&text).map_err(|source| data(DataError::Json { path: path.to_path_buf(), source }))
}

fn emit<T: Serialize + ?Sized>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_canonical_json(value).map_err(|e| Failure::Internal(format!("serializing output: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| data(DataError::Io { path: path.to_path_buf(), source })),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Internal(format!("writing to standard output: {e}")))
        }
    }
}

fn check_cap(cap: Option<f64>) -> Result<Option<f64>, Failure> {
    match cap {
        Some(c) if !(c > 0.0 && c.is_finite()) => Err(Failure::Usage(format!("--cap must be a positive number, got {c}"))),
        _ => Ok(cap),
    }
}

fn compute(args: ComputeArgs) -> Result<(), Failure> {
    let cap = check_cap(args.cap)?;
    let labels = read_label_csv(&args.labels).map_err(data)?;
    let preds = read_prediction_csv(&args.preds).map_err(data)?;
    let preds = preds
        .align_to(labels.record_ids())
        .map_err(|e| data(format!("{} vs {}: {e}", args.preds.display(), args.labels.display())))?;
    let source_weights = match &args.source_weights {
        Some(path) => Some(read_source_weights(path, preds.source_label_names()).map_err(data)?),
        None => None,
    };
    let report = compute_melep(&preds, &labels, &MelepOptions { cap, source_weights }).map_err(data)?;
    emit(&Versioned { schema_version: MELEP_REPORT_SCHEMA_VERSION, body: &report }, args.out.as_deref())
}

fn load_manifest(manifest: &Path, labels: Option<&Path>) -> Result<(LabelMatrix, Vec<Checkpoint>), Failure> {
    let (manifest, base) = DatasetManifest::read(manifest).map_err(data)?;
    let labels = match labels {
        Some(path) => read_label_csv(path).map_err(data)?,
        None => manifest.load_labels(&base).map_err(data)?,
    };
    let checkpoints = manifest
        .predictions
        .iter()
        .map(|entry| {
            let predictions = entry.load(&base, &labels).map_err(data)?;
            Ok(Checkpoint { id: entry.checkpoint_id.clone(), predictions })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok((labels, checkpoints))
}

fn rank(args: RankArgs) -> Result<(), Failure> {
    let cap = check_cap(args.cap)?;
    let (labels, checkpoints) = load_manifest(&args.manifest, args.labels.as_deref())?;
    let ranking = rank_checkpoints(&checkpoints, &labels, &MelepOptions { cap, source_weights: None }).map_err(data)?;
    emit(&ranking, args.out.as_deref())
}

fn study(args: StudyArgs) -> Result<(), Failure> {
    let cap = check_cap(args.cap)?;
    let f1_source = match (&args.f1, args.proxy) {
        (Some(path), false) => F1Source::External(read_f1_table(path).map_err(data)?),
        (None, true) => F1Source::Proxy,
        _ => return Err(Failure::Usage("study needs either --proxy or --f1 PATH".into())),
    };
    let sampler: SamplerConfig = read_json(&args.sampler_config)?;
    let (labels, checkpoints) = load_manifest(&args.manifest, args.labels.as_deref())?;
    let options = StudyOptions { cap, binning: args.binning };
    let (folds, report) = run_study(&labels, &checkpoints, &sampler, &f1_source, &options).map_err(data)?;
    if let Some(path) = &args.folds_out {
        let set = FoldSet { schema_version: FOLDS_SCHEMA_VERSION, rng: RNG_ALGORITHM.into(), config: sampler, folds };
        write_fold_set(&set, path).map_err(data)?;
    }
    emit(&report, args.out.as_deref())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let config: SynthConfig = read_json(&args.config)?;
    let written = write_synthetic_bench(&config, &args.out_dir).map_err(data)?;
    let mut stdout = std::io::stdout().lock();
    for path in written {
        writeln!(stdout, "{}", path.display()).map_err(|e| Failure::Internal(e.to_string()))?;
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Internal(format!("starting worker threads: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Compute(args) => compute(args),
        Command::Rank(args) => rank(args),
        Command::Study(args) => study(args),
        Command::Synth(args) => synth(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(failure)) => {
            eprintln!("melep: {}", failure.message());
            ExitCode::from(failure.code())
        }
        Err(_) => {
            eprintln!("melep: internal error");
            ExitCode::from(3)
        }
    }
}

//! Downstream performance metrics and the statistics used to relate them to
//! MELEP: per-label precision/recall/F1, support-weighted F1, Pearson
//! correlation with a two-sided p-value, least-squares fit lines, and
//! four-level binning of MELEP values.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::matrix::LabelMatrix;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("truth is {truth_rows}x{truth_cols} but predictions are {pred_rows}x{pred_cols}")]
    ShapeMismatch { truth_rows: usize, truth_cols: usize, pred_rows: usize, pred_cols: usize },
    #[error("ground truth has no positive entries; F1 support weights are undefined")]
    NoSupport,
    #[error("inputs have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("input is constant; correlation is undefined")]
    ConstantInput,
    #[error("all values are equal; cannot form distance bins")]
    DegenerateRange,
    #[error("quantile bin edges are not strictly ascending (too many tied values)")]
    DegenerateBins,
    #[error("input contains a non-finite value at position {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: Vec<usize>,
    pub fp: Vec<usize>,
    #[serde(rename = "fn")]
    pub fn_: Vec<usize>,
    pub n: usize,
}

impl ConfusionCounts {
    pub fn tn(&self, label: usize) -> usize {
        self.n - self.tp[label] - self.fp[label] - self.fn_[label]
    }

    /// Number of records whose ground truth is positive for `label`.
    pub fn support(&self, label: usize) -> usize {
        self.tp[label] + self.fn_[label]
    }
}

pub fn confusion_counts(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<ConfusionCounts, StatsError> {
    if truth.n() != pred.n() || truth.y() != pred.y() {
        return Err(StatsError::ShapeMismatch {
            truth_rows: truth.n(),
            truth_cols: truth.y(),
            pred_rows: pred.n(),
            pred_cols: pred.y(),
        });
    }
    let labels = truth.y();
    let mut counts = ConfusionCounts { tp: vec![0; labels], fp: vec![0; labels], fn_: vec![0; labels], n: truth.n() };
    for i in 0..truth.n() {
        for (j, (&t, &p)) in truth.row(i).iter().zip(pred.row(i)).enumerate() {
            match (t, p) {
                (true, true) => counts.tp[j] += 1,
                (false, true) => counts.fp[j] += 1,
                (true, false) => counts.fn_[j] += 1,
                (false, false) => {}
            }
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1Report<T> {
    pub precision: Vec<T>,
    pub recall: Vec<T>,
    pub f1: Vec<T>,
    /// Each label's share of all positive ground-truth entries.
    pub support_weights: Vec<T>,
    pub weighted_f1: T,
}

fn ratio_or_zero<T: Real>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

/// Per-label precision, recall and F1, and their support-weighted average.
///
/// Undefined ratios (0/0) are taken as zero.
pub fn f1_report<T: Real>(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<F1Report<T>, StatsError> {
    let counts = confusion_counts(truth, pred)?;
    let labels = truth.y();
    let total_support: usize = (0..labels).map(|j| counts.support(j)).sum();
    if total_support == 0 {
        return Err(StatsError::NoSupport);
    }
    let two = T::one() + T::one();
    let mut report = F1Report {
        precision: Vec::with_capacity(labels),
        recall: Vec::with_capacity(labels),
        f1: Vec::with_capacity(labels),
        support_weights: Vec::with_capacity(labels),
        weighted_f1: T::zero(),
    };
    for j in 0..labels {
        let tp = counts.tp[j];
        let p: T = ratio_or_zero(tp, tp + counts.fp[j]);
        let r: T = ratio_or_zero(tp, tp + counts.fn_[j]);
        let f1 = if p + r > T::zero() { two * p * r / (p + r) } else { T::zero() };
        let w: T = ratio_or_zero(counts.support(j), total_support);
        report.weighted_f1 = report.weighted_f1 + w * f1;
        report.precision.push(p);
        report.recall.push(r);
        report.f1.push(f1);
        report.support_weights.push(w);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult<T> {
    pub r: T,
    pub p_value: T,
    pub sample_count: usize,
    pub fit_slope: T,
    pub fit_intercept: T,
}

fn check_finite<T: Real>(values: &[T]) -> Result<(), StatsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(StatsError::NonFinite(i)),
        None => Ok(()),
    }
}

fn mean<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, &v| acc + v) / T::from_count(values.len())
}

struct Moments<T> {
    mean_x: T,
    mean_y: T,
    sxx: T,
    syy: T,
    sxy: T,
}

fn centered_moments<T: Real>(xs: &[T], ys: &[T]) -> Moments<T> {
    let mean_x = mean(xs);
    let mean_y = mean(ys);
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    Moments { mean_x, mean_y, sxx, syy, sxy }
}

/// Ordinary least squares fit of `ys` on `xs`, returned as `(slope, intercept)`.
pub fn least_squares<T: Real>(xs: &[T], ys: &[T]) -> Result<(T, T), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFewPoints { needed: 2, found: xs.len() });
    }
    check_finite(xs)?;
    check_finite(ys)?;
    let m = centered_moments(xs, ys);
    if m.sxx == T::zero() {
        return Err(StatsError::ConstantInput);
    }
    let slope = m.sxy / m.sxx;
    Ok((slope, m.mean_y - slope * m.mean_x))
}

/// Two-sided p-value of a sample correlation `r` over `m` points under the
/// null of zero correlation (Student t with `m - 2` degrees of freedom).
///
/// With `t = r * sqrt(df / (1 - r^2))` the tail mass is
/// `I_{df / (df + t^2)}(df / 2, 1 / 2)`, and `df / (df + t^2) = 1 - r^2`.
pub fn correlation_p_value(r: f64, m: usize) -> f64 {
    let df = (m - 2) as f64;
    let x = (1.0 - r * r).clamp(0.0, 1.0);
    if x == 0.0 {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Sample Pearson correlation, its two-sided p-value and the least-squares
/// line of `ys` on `xs`.
pub fn pearson<T: Real>(xs: &[T], ys: &[T]) -> Result<CorrelationResult<T>, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, found: xs.len() });
    }
    check_finite(xs)?;
    check_finite(ys)?;
    let m = centered_moments(xs, ys);
    if m.sxx == T::zero() || m.syy == T::zero() {
        return Err(StatsError::ConstantInput);
    }
    let r = (m.sxy / (m.sxx.sqrt() * m.syy.sqrt())).max(-T::one()).min(T::one());
    let p = correlation_p_value(r.to_f64().expect("finite r"), xs.len());
    let slope = m.sxy / m.sxx;
    Ok(CorrelationResult {
        r,
        p_value: T::lit(p),
        sample_count: xs.len(),
        fit_slope: slope,
        fit_intercept: m.mean_y - slope * m.mean_x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinningMode {
    #[default]
    EqualWidth,
    Quantile,
}

impl std::str::FromStr for BinningMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal-width" => Ok(Self::EqualWidth),
            "quantile" => Ok(Self::Quantile),
            other => Err(format!("unknown binning mode `{other}` (expected equal-width or quantile)")),
        }
    }
}

pub const DISTANCE_LEVELS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceBinning<T> {
    pub mode: BinningMode,
    /// Five ascending edges delimiting four bins. Bins are closed on the left;
    /// the last one is also closed on the right.
    pub bin_edges: Vec<T>,
    pub bin_mean_f1: Vec<Option<T>>,
    pub bin_counts: Vec<usize>,
}

impl<T: Real> DistanceBinning<T> {
    pub fn bin_of(&self, value: T) -> usize {
        assign_bin(&self.bin_edges, value)
    }
}

/// Index of the bin containing `value`; values outside the edges go to the
/// nearest end bin.
pub fn assign_bin<T: Real>(edges: &[T], value: T) -> usize {
    edges[1..edges.len() - 1].iter().take_while(|&&e| value >= e).count()
}

fn quantile_sorted<T: Real>(sorted: &[T], q: T) -> T {
    let pos = q * T::from_count(sorted.len() - 1);
    let lo = pos.floor();
    let idx = lo.to_usize().expect("position in range");
    if idx + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = pos - lo;
    sorted[idx] + frac * (sorted[idx + 1] - sorted[idx])
}

/// Groups (MELEP, F1) points into four distance levels over the observed
/// MELEP range and averages F1 within each.
pub fn bin_by_distance<T: Real>(
    melep_values: &[T],
    f1_values: &[T],
    mode: BinningMode,
) -> Result<DistanceBinning<T>, StatsError> {
    if melep_values.len() != f1_values.len() {
        return Err(StatsError::LengthMismatch { left: melep_values.len(), right: f1_values.len() });
    }
    if melep_values.len() < DISTANCE_LEVELS {
        return Err(StatsError::TooFewPoints { needed: DISTANCE_LEVELS, found: melep_values.len() });
    }
    check_finite(melep_values)?;
    check_finite(f1_values)?;

    let lo = melep_values.iter().copied().fold(T::infinity(), T::min);
    let hi = melep_values.iter().copied().fold(T::neg_infinity(), T::max);
    if !(hi > lo) {
        return Err(StatsError::DegenerateRange);
    }
    let levels = T::from_count(DISTANCE_LEVELS);
    let edges: Vec<T> = match mode {
        BinningMode::EqualWidth => {
            let width = hi - lo;
            (0..=DISTANCE_LEVELS)
                .map(|k| match k {
                    0 => lo,
                    DISTANCE_LEVELS => hi,
                    k => lo + width * T::from_count(k) / levels,
                })
                .collect()
        }
        BinningMode::Quantile => {
            let mut sorted = melep_values.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
            (0..=DISTANCE_LEVELS)
                .map(|k| quantile_sorted(&sorted, T::from_count(k) / levels))
                .collect()
        }
    };
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(match mode {
            BinningMode::EqualWidth => StatsError::DegenerateRange,
            BinningMode::Quantile => StatsError::DegenerateBins,
        });
    }

    let mut counts = vec![0usize; DISTANCE_LEVELS];
    let mut sums = vec![T::zero(); DISTANCE_LEVELS];
    for (&m, &f) in melep_values.iter().zip(f1_values) {
        let k = assign_bin(&edges, m);
        counts[k] += 1;
        sums[k] = sums[k] + f;
    }
    let means = counts
        .iter()
        .zip(&sums)
        .map(|(&c, &s)| (c > 0).then(|| s / T::from_count(c)))
        .collect();
    Ok(DistanceBinning { mode, bin_edges: edges, bin_mean_f1: means, bin_counts: counts })
}

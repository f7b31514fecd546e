//! The MELEP transferability measure.
//!
//! For every (target label `y`, source label `z`) pair the checkpoint's
//! predicted probabilities are turned into a 2x2 empirical joint
//! distribution between the ground truth of `y` and a soft draw of `z`.
//! Conditioning on `z` yields a tiny binary classifier for `y`, the
//! *empirical predictor*. Its mean negative log-likelihood on the target
//! records is the pair score `phi(y, z)`; MELEP averages these over source
//! labels and takes a positive/negative-ratio weighted mean over target
//! labels. Smaller is better.
//!
//! All reductions run in ascending index order, so results do not depend on
//! how many threads evaluated the pairs.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{LabelMatrix, PredictionMatrix};
use crate::scalar::{Real, Scalar};

/// Lower bound applied to every per-record likelihood before taking its log.
pub const LIKELIHOOD_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("predictions have {preds} records but labels have {labels}")]
    DimensionMismatch { preds: usize, labels: usize },
    #[error("target label index {index} out of range ({count} target labels)")]
    TargetIndex { index: usize, count: usize },
    #[error("source label index {index} out of range ({count} source labels)")]
    SourceIndex { index: usize, count: usize },
    #[error("target label {index} (`{name}`) has no negative records; its weight is unbounded (supply a cap)")]
    DegenerateLabel { index: usize, name: String },
    #[error("weight cap must be positive and finite")]
    InvalidCap,
    #[error("invalid source weights: {0}")]
    SourceWeights(String),
    #[error("predictor was fitted on {fitted} source labels but got {found}")]
    SourceCount { fitted: usize, found: usize },
}

/// Empirical distributions for one (target, source) label pair.
///
/// `joint[t][s]` is indexed by target value `t` then source value `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDistribution<T> {
    pub target_label: usize,
    pub source_label: usize,
    pub joint: [[T; 2]; 2],
    pub marginal: [T; 2],
    pub conditional: [[T; 2]; 2],
}

impl<T: Scalar> PairDistribution<T> {
    /// Likelihood the empirical predictor assigns to target value `t` for a
    /// record whose source-label probability is `theta`.
    #[inline]
    pub fn likelihood(&self, t: bool, theta: T) -> T {
        let row = &self.conditional[t as usize];
        row[0] * (T::one() - theta) + row[1] * theta
    }

    /// Probability that the target label is positive.
    #[inline]
    pub fn positive_probability(&self, theta: T) -> T {
        self.likelihood(true, theta)
    }
}

fn check_pair<T>(
    preds: &PredictionMatrix<T>,
    labels: &LabelMatrix,
    y: usize,
    z: usize,
) -> Result<(), MetricError>
where
    T: Scalar,
{
    if preds.n() != labels.n() {
        return Err(MetricError::DimensionMismatch { preds: preds.n(), labels: labels.n() });
    }
    if y >= labels.y() {
        return Err(MetricError::TargetIndex { index: y, count: labels.y() });
    }
    if z >= preds.z() {
        return Err(MetricError::SourceIndex { index: z, count: preds.z() });
    }
    Ok(())
}

/// Estimates the joint, marginal and conditional distributions of one pair.
///
/// The marginal is summed directly over all records, so it is bit-identical
/// for every target label at a fixed source label. A conditional column whose
/// marginal is zero is left all-zero.
pub fn compute_pair_distribution<T: Scalar>(
    preds: &PredictionMatrix<T>,
    labels: &LabelMatrix,
    y: usize,
    z: usize,
) -> Result<PairDistribution<T>, MetricError> {
    check_pair(preds, labels, y, z)?;
    let n = T::from_count(preds.n());

    let mut joint = [[T::zero(); 2]; 2];
    let mut marginal = [T::zero(); 2];
    for i in 0..preds.n() {
        let theta = preds.get(i, z);
        let complement = T::one() - theta;
        let t = labels.get(i, y) as usize;
        joint[t][0] = joint[t][0] + complement;
        joint[t][1] = joint[t][1] + theta;
        marginal[0] = marginal[0] + complement;
        marginal[1] = marginal[1] + theta;
    }
    for row in joint.iter_mut() {
        for v in row.iter_mut() {
            *v = *v / n;
        }
    }
    for v in marginal.iter_mut() {
        *v = *v / n;
    }

    let mut conditional = [[T::zero(); 2]; 2];
    for s in 0..2 {
        if marginal[s] > T::zero() {
            for t in 0..2 {
                conditional[t][s] = joint[t][s] / marginal[s];
            }
        }
    }

    Ok(PairDistribution { target_label: y, source_label: z, joint, marginal, conditional })
}

/// Pair score together with the number of likelihood floors it needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore<T> {
    pub phi: T,
    pub clamp_events: usize,
}

/// Mean negative log-likelihood of the pair's empirical predictor.
pub fn compute_phi<T: Real>(
    preds: &PredictionMatrix<T>,
    labels: &LabelMatrix,
    pair: &PairDistribution<T>,
) -> Result<PairScore<T>, MetricError> {
    let (y, z) = (pair.target_label, pair.source_label);
    check_pair(preds, labels, y, z)?;
    let floor = T::lit(LIKELIHOOD_FLOOR);
    let mut clamp_events = 0;
    let mut log_sum = T::zero();
    for i in 0..preds.n() {
        let mut lik = pair.likelihood(labels.get(i, y), preds.get(i, z));
        if !(lik >= floor) {
            lik = floor;
            clamp_events += 1;
        }
        log_sum = log_sum + lik.ln();
    }
    // zero minus, not negation: a perfect predictor must give +0
    let phi = (T::zero() - log_sum) / T::from_count(preds.n());
    Ok(PairScore { phi, clamp_events })
}

/// Per-record probability that target label `y` is positive under the
/// empirical predictor built from source label `z`.
pub fn empirical_predictor_likelihood<T: Real>(
    preds: &PredictionMatrix<T>,
    labels: &LabelMatrix,
    y: usize,
    z: usize,
) -> Result<Vec<T>, MetricError> {
    let pair = compute_pair_distribution(preds, labels, y, z)?;
    Ok(preds.column(z).map(|theta| pair.positive_probability(theta)).collect())
}

/// Positive-to-negative ratio of each target label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetWeights<T> {
    pub weights: Vec<T>,
    pub positive_counts: Vec<usize>,
    pub negative_counts: Vec<usize>,
}

/// Computes `w_y = positives / negatives`, optionally capped.
///
/// A label with no negatives is an error unless `cap` is given, in which case
/// it receives the cap. A label with no positives gets weight zero.
pub fn compute_target_weights<T: Scalar>(
    labels: &LabelMatrix,
    cap: Option<T>,
) -> Result<TargetWeights<T>, MetricError> {
    if let Some(c) = cap {
        if !(c > T::zero()) || c.to_f64_lossy().is_infinite() {
            return Err(MetricError::InvalidCap);
        }
    }
    let mut weights = Vec::with_capacity(labels.y());
    let mut positive_counts = Vec::with_capacity(labels.y());
    let mut negative_counts = Vec::with_capacity(labels.y());
    for y in 0..labels.y() {
        let pos = labels.positives(y);
        let neg = labels.n() - pos;
        let w = match (neg, cap) {
            (0, Some(c)) => c,
            (0, None) => {
                return Err(MetricError::DegenerateLabel {
                    index: y,
                    name: labels.target_label_names()[y].clone(),
                })
            }
            (_, cap) => {
                let w = T::from_count(pos) / T::from_count(neg);
                match cap {
                    Some(c) if w > c => c,
                    _ => w,
                }
            }
        };
        weights.push(w);
        positive_counts.push(pos);
        negative_counts.push(neg);
    }
    Ok(TargetWeights { weights, positive_counts, negative_counts })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MelepOptions<T> {
    /// Upper bound on target weights; also admits labels with no negatives.
    pub cap: Option<T>,
    /// Optional per-source-label weights, normalized to sum to one.
    pub source_weights: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MelepReport<T> {
    pub melep: T,
    /// `phi[y][z]` for every target/source pair.
    pub phi: Vec<Vec<T>>,
    /// Unweighted mean of `phi` over source labels, one per target label.
    pub per_label: Vec<T>,
    pub weights: TargetWeights<T>,
    pub source_weighted_melep: Option<T>,
    pub clamp_events: usize,
    pub target_label_names: Vec<String>,
    pub source_label_names: Vec<String>,
}

fn normalized_source_weights<T: Real>(weights: &[T], z: usize) -> Result<Vec<T>, MetricError> {
    if weights.len() != z {
        return Err(MetricError::SourceWeights(format!(
            "expected {z} weights, got {}",
            weights.len()
        )));
    }
    if let Some(bad) = weights.iter().position(|w| !(w.is_finite() && *w >= T::zero())) {
        return Err(MetricError::SourceWeights(format!("weight {bad} is negative or not finite")));
    }
    let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    if !(total > T::zero()) {
        return Err(MetricError::SourceWeights("weights sum to zero".into()));
    }
    Ok(weights.iter().map(|&w| w / total).collect())
}

/// Computes MELEP and its per-pair and per-label breakdown.
///
/// `melep = (1/Y) * sum_y w_y * per_label[y]` with no renormalization by the
/// sum of weights.
pub fn compute_melep<T: Real>(
    preds: &PredictionMatrix<T>,
    labels: &LabelMatrix,
    options: &MelepOptions<T>,
) -> Result<MelepReport<T>, MetricError> {
    if preds.n() != labels.n() {
        return Err(MetricError::DimensionMismatch { preds: preds.n(), labels: labels.n() });
    }
    let weights = compute_target_weights(labels, options.cap)?;
    let source_weights = options
        .source_weights
        .as_deref()
        .map(|w| normalized_source_weights(w, preds.z()))
        .transpose()?;

    let rows: Vec<Vec<PairScore<T>>> = (0..labels.y())
        .into_par_iter()
        .map(|y| {
            (0..preds.z())
                .map(|z| {
                    let pair = compute_pair_distribution(preds, labels, y, z)?;
                    compute_phi(preds, labels, &pair)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let y_count = T::from_count(labels.y());
    let z_count = T::from_count(preds.z());
    let mut phi = Vec::with_capacity(rows.len());
    let mut per_label = Vec::with_capacity(rows.len());
    let mut clamp_events = 0;
    let mut total = T::zero();
    let mut source_total = T::zero();
    for (y, row) in rows.into_iter().enumerate() {
        let mut row_sum = T::zero();
        let mut row_weighted = T::zero();
        for (z, score) in row.iter().enumerate() {
            row_sum = row_sum + score.phi;
            if let Some(v) = &source_weights {
                row_weighted = row_weighted + v[z] * score.phi;
            }
            clamp_events += score.clamp_events;
        }
        let mean = row_sum / z_count;
        total = total + weights.weights[y] * mean;
        source_total = source_total + weights.weights[y] * row_weighted;
        per_label.push(mean);
        phi.push(row.into_iter().map(|s| s.phi).collect());
    }

    Ok(MelepReport {
        melep: total / y_count,
        phi,
        per_label,
        source_weighted_melep: source_weights.map(|_| source_total / y_count),
        weights,
        clamp_events,
        target_label_names: labels.target_label_names().to_vec(),
        source_label_names: preds.source_label_names().to_vec(),
    })
}

/// The set of pairwise empirical predictors fitted on one (predictions,
/// labels) sample, usable on new predictions from the same checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPredictor<T> {
    /// `pairs[y][z]`
    pairs: Vec<Vec<PairDistribution<T>>>,
    source_count: usize,
}

impl<T: Real> EmpiricalPredictor<T> {
    pub fn fit(preds: &PredictionMatrix<T>, labels: &LabelMatrix) -> Result<Self, MetricError> {
        if preds.n() != labels.n() {
            return Err(MetricError::DimensionMismatch { preds: preds.n(), labels: labels.n() });
        }
        let pairs = (0..labels.y())
            .map(|y| (0..preds.z()).map(|z| compute_pair_distribution(preds, labels, y, z)).collect())
            .collect::<Result<_, _>>()?;
        Ok(Self { pairs, source_count: preds.z() })
    }

    pub fn pair(&self, y: usize, z: usize) -> &PairDistribution<T> {
        &self.pairs[y][z]
    }

    pub fn target_count(&self) -> usize {
        self.pairs.len()
    }

    /// Probability of each target label for each record: the mean over
    /// source labels of the pairwise positive probabilities. Row-major
    /// `n x Y`.
    pub fn predict_proba(&self, preds: &PredictionMatrix<T>) -> Result<Vec<Vec<T>>, MetricError> {
        if preds.z() != self.source_count {
            return Err(MetricError::SourceCount { fitted: self.source_count, found: preds.z() });
        }
        let z_count = T::from_count(self.source_count);
        Ok((0..preds.n())
            .map(|i| {
                let theta = preds.row(i);
                self.pairs
                    .iter()
                    .map(|row| {
                        let sum = row
                            .iter()
                            .zip(theta)
                            .fold(T::zero(), |acc, (pair, &th)| acc + pair.positive_probability(th));
                        sum / z_count
                    })
                    .collect()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_rational::Rational64;

    fn instance_a() -> (PredictionMatrix<f64>, LabelMatrix) {
        let preds = PredictionMatrix::from_rows(vec![
            vec![0.9, 0.2],
            vec![0.8, 0.7],
            vec![0.1, 0.6],
            vec![0.3, 0.4],
        ])
        .unwrap();
        let labels = LabelMatrix::from_rows(vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![0, 0]]).unwrap();
        (preds, labels)
    }

    fn separating() -> (PredictionMatrix<f64>, LabelMatrix) {
        (
            PredictionMatrix::from_rows(vec![vec![1.0], vec![0.0]]).unwrap(),
            LabelMatrix::from_rows(vec![vec![1], vec![0]]).unwrap(),
        )
    }

    fn uniform() -> (PredictionMatrix<f64>, LabelMatrix) {
        (
            PredictionMatrix::from_rows(vec![vec![0.5]; 4]).unwrap(),
            LabelMatrix::from_rows(vec![vec![1], vec![0], vec![1], vec![0]]).unwrap(),
        )
    }

    #[test]
    fn instance_a_pair_distribution() {
        let (preds, labels) = instance_a();
        let pair = compute_pair_distribution(&preds, &labels, 0, 0).unwrap();
        let expected = [[0.4, 0.1], [0.075, 0.425]];
        for t in 0..2 {
            for s in 0..2 {
                assert_abs_diff_eq!(pair.joint[t][s], expected[t][s], epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(pair.marginal[0], 0.475, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.marginal[1], 0.525, epsilon = 1e-12);
    }

    #[test]
    fn instance_a_pair_is_exact_in_rationals() {
        let (preds, labels) = instance_a();
        let exact = preds.cast(|v| Rational64::new((v * 10.0).round() as i64, 10));
        let pair = compute_pair_distribution(&exact, &labels, 0, 0).unwrap();
        assert_eq!(pair.joint[1][0], Rational64::new(3, 40));
        assert_eq!(pair.marginal[0], pair.joint[0][0] + pair.joint[1][0]);
        assert_eq!(pair.conditional[0][1] + pair.conditional[1][1], Rational64::from_integer(1));
    }

    #[test]
    fn instance_a_phi_and_predictor() {
        let (preds, labels) = instance_a();
        let pair = compute_pair_distribution(&preds, &labels, 0, 0).unwrap();
        let score = compute_phi(&preds, &labels, &pair).unwrap();
        assert_abs_diff_eq!(score.phi, 0.3426157063690609, epsilon = 1e-12);
        assert_eq!(score.clamp_events, 0);
        let p = empirical_predictor_likelihood(&preds, &labels, 0, 0).unwrap();
        assert_abs_diff_eq!(p[0], 0.7444, epsilon = 1e-3);
        assert_abs_diff_eq!(p[3], 0.3534, epsilon = 1e-3);
    }

    #[test]
    fn separating_predictor() {
        let (preds, labels) = separating();
        let pair = compute_pair_distribution(&preds, &labels, 0, 0).unwrap();
        assert_eq!(pair.joint, [[0.5, 0.0], [0.0, 0.5]]);
        assert_eq!(pair.marginal, [0.5, 0.5]);
        assert_eq!(pair.conditional, [[1.0, 0.0], [0.0, 1.0]]);
        let score = compute_phi(&preds, &labels, &pair).unwrap();
        assert_eq!(score.phi, 0.0);
        assert!(score.phi.is_sign_positive());
        assert_eq!(empirical_predictor_likelihood(&preds, &labels, 0, 0).unwrap(), vec![1.0, 0.0]);
        let report = compute_melep(&preds, &labels, &MelepOptions::default()).unwrap();
        assert_eq!(report.melep, 0.0);
    }

    #[test]
    fn uniform_predictor() {
        let (preds, labels) = uniform();
        let pair = compute_pair_distribution(&preds, &labels, 0, 0).unwrap();
        assert_eq!(pair.joint, [[0.25; 2]; 2]);
        assert_eq!(pair.marginal, [0.5, 0.5]);
        assert_eq!(pair.conditional, [[0.5; 2]; 2]);
        let score = compute_phi(&preds, &labels, &pair).unwrap();
        assert_abs_diff_eq!(score.phi, std::f64::consts::LN_2, epsilon = 1e-15);
        assert!(empirical_predictor_likelihood(&preds, &labels, 0, 0).unwrap().iter().all(|&p| p == 0.5));
        let report = compute_melep(&preds, &labels, &MelepOptions::default()).unwrap();
        assert_abs_diff_eq!(report.melep, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn zero_marginal_column_is_zero() {
        let preds = PredictionMatrix::from_rows(vec![vec![0.0], vec![0.0], vec![0.0]]).unwrap();
        let labels = LabelMatrix::from_rows(vec![vec![1], vec![0], vec![0]]).unwrap();
        let pair = compute_pair_distribution(&preds, &labels, 0, 0).unwrap();
        assert_eq!(pair.marginal[1], 0.0);
        assert_eq!(pair.conditional[0][1], 0.0);
        assert_eq!(pair.conditional[1][1], 0.0);
        assert_abs_diff_eq!(pair.conditional[1][0], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn weights() {
        let col = |v: &[u8]| LabelMatrix::from_rows(v.iter().map(|&x| vec![x]).collect()).unwrap();
        let w = compute_target_weights::<f64>(&col(&[1, 1, 0, 0]), None).unwrap();
        assert_eq!(w.weights, vec![1.0]);
        let w = compute_target_weights::<f64>(&col(&[1, 1, 1, 0]), None).unwrap();
        assert_eq!(w.weights, vec![3.0]);
        assert_eq!((w.positive_counts[0], w.negative_counts[0]), (3, 1));
        let err = compute_target_weights::<f64>(&col(&[1, 1, 1, 1]), None).unwrap_err();
        assert!(matches!(err, MetricError::DegenerateLabel { index: 0, .. }));
        let w = compute_target_weights(&col(&[1, 1, 1, 1]), Some(5.0)).unwrap();
        assert_eq!(w.weights, vec![5.0]);
        let w = compute_target_weights(&col(&[1, 1, 1, 0]), Some(2.0)).unwrap();
        assert_eq!(w.weights, vec![2.0]);
        let w = compute_target_weights::<f64>(&col(&[0, 0, 0]), None).unwrap();
        assert_eq!(w.weights, vec![0.0]);
        assert_eq!(compute_target_weights(&col(&[1, 0]), Some(0.0)).unwrap_err(), MetricError::InvalidCap);
        let w = compute_target_weights(&col(&[1, 1, 0]), None::<Rational64>).unwrap();
        assert_eq!(w.weights, vec![Rational64::from_integer(2)]);
    }

    #[test]
    fn instance_a_melep() {
        let (preds, labels) = instance_a();
        let report = compute_melep(&preds, &labels, &MelepOptions::default()).unwrap();
        assert_abs_diff_eq!(report.melep, 0.5718594802046371, epsilon = 1e-12);
        assert_eq!(report.weights.weights, vec![1.0, 1.0]);
        assert_abs_diff_eq!(report.phi[1][1], 0.5785380997770644, epsilon = 1e-12);
        assert_eq!(report.clamp_events, 0);
        assert!(report.source_weighted_melep.is_none());
    }

    #[test]
    fn source_weighted_variant() {
        let (preds, labels) = instance_a();
        let uniform = MelepOptions { cap: None, source_weights: Some(vec![3.0, 3.0]) };
        let report = compute_melep(&preds, &labels, &uniform).unwrap();
        assert_abs_diff_eq!(report.source_weighted_melep.unwrap(), report.melep, epsilon = 1e-15);

        let first_only = MelepOptions { cap: None, source_weights: Some(vec![1.0, 0.0]) };
        let report = compute_melep(&preds, &labels, &first_only).unwrap();
        let expected = (report.phi[0][0] + report.phi[1][0]) / 2.0;
        assert_abs_diff_eq!(report.source_weighted_melep.unwrap(), expected, epsilon = 1e-15);

        for bad in [vec![1.0], vec![-1.0, 2.0], vec![0.0, 0.0], vec![f64::NAN, 1.0]] {
            let opts = MelepOptions { cap: None, source_weights: Some(bad) };
            assert!(matches!(compute_melep(&preds, &labels, &opts), Err(MetricError::SourceWeights(_))));
        }
    }

    #[test]
    fn extreme_predictions_stay_finite() {
        let preds = PredictionMatrix::<f64>::from_rows(vec![vec![1.0], vec![0.0], vec![1.0], vec![0.0]]).unwrap();
        let labels = LabelMatrix::from_rows(vec![vec![1], vec![0], vec![0], vec![1]]).unwrap();
        let report = compute_melep(&preds, &labels, &MelepOptions::default()).unwrap();
        assert!(report.melep.is_finite());
        assert_abs_diff_eq!(report.phi[0][0], std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn held_out_pair_is_floored() {
        // A pair fitted on one sample and scored on another can assign zero
        // likelihood; the floor keeps phi finite and counts the events.
        let fit_preds = PredictionMatrix::from_rows(vec![vec![1.0], vec![0.0]]).unwrap();
        let fit_labels = LabelMatrix::from_rows(vec![vec![1], vec![0]]).unwrap();
        let pair = compute_pair_distribution(&fit_preds, &fit_labels, 0, 0).unwrap();
        let eval_labels = LabelMatrix::from_rows(vec![vec![0], vec![0]]).unwrap();
        let score = compute_phi(&fit_preds, &eval_labels, &pair).unwrap();
        assert_eq!(score.clamp_events, 1);
        assert_abs_diff_eq!(score.phi, -(LIKELIHOOD_FLOOR.ln()) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        let (preds, labels) = instance_a();
        let short = labels.select_rows(&[0, 1]).unwrap();
        assert_eq!(
            compute_pair_distribution(&preds, &short, 0, 0).unwrap_err(),
            MetricError::DimensionMismatch { preds: 4, labels: 2 }
        );
        assert_eq!(
            compute_pair_distribution(&preds, &labels, 2, 0).unwrap_err(),
            MetricError::TargetIndex { index: 2, count: 2 }
        );
        assert_eq!(
            compute_pair_distribution(&preds, &labels, 0, 5).unwrap_err(),
            MetricError::SourceIndex { index: 5, count: 2 }
        );
    }

    #[test]
    fn predictor_matches_pairwise_likelihoods() {
        let (preds, labels) = instance_a();
        let ep = EmpiricalPredictor::fit(&preds, &labels).unwrap();
        let proba = ep.predict_proba(&preds).unwrap();
        for y in 0..2 {
            let a = empirical_predictor_likelihood(&preds, &labels, y, 0).unwrap();
            let b = empirical_predictor_likelihood(&preds, &labels, y, 1).unwrap();
            for i in 0..4 {
                assert_abs_diff_eq!(proba[i][y], (a[i] + b[i]) / 2.0, epsilon = 1e-15);
            }
        }
        let narrow = preds.select_columns(&[0]).unwrap();
        assert!(matches!(ep.predict_proba(&narrow), Err(MetricError::SourceCount { .. })));
    }

    #[test]
    fn f32_agrees_with_f64() {
        let (preds, labels) = instance_a();
        let p32 = preds.cast(|v| v as f32);
        let r32 = compute_melep(&p32, &labels, &MelepOptions::default()).unwrap();
        assert_abs_diff_eq!(r32.melep as f64, 0.5718594802046371, epsilon = 1e-5);
    }
}

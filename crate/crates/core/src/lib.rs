//! Multi-label transferability estimation.
//!
//! Given a checkpoint's per-record probabilities over its own (source)
//! labels and the binary ground truth of a target task, [`compute_melep`]
//! scores how well the checkpoint should transfer: lower is better. The
//! remaining modules provide the evaluation machinery around the measure:
//! weighted F1 and correlation statistics ([`stats`]), reproducible target
//! task sampling ([`sampler`]), synthetic worlds and checkpoints
//! ([`synth`]), on-disk formats ([`io`]) and the rank/study pipelines
//! ([`study`]).
//!
//! Core numerics are generic over the scalar type. Distribution estimation
//! accepts exact rationals; everything that takes a logarithm needs `f32` or
//! `f64`. Aliases for the common instantiations live at the crate root.

// Range checks are written as `!(x > bound)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod io;
pub mod matrix;
pub mod metric;
pub mod sampler;
pub mod scalar;
pub mod stats;
pub mod study;
pub mod synth;

pub use matrix::{AlignError, LabelMatrix, MatrixError, PredictionMatrix};
pub use metric::{
    compute_melep, compute_pair_distribution, compute_phi, compute_target_weights,
    empirical_predictor_likelihood, EmpiricalPredictor, MelepOptions, MelepReport, MetricError,
    PairDistribution, PairScore, TargetWeights, LIKELIHOOD_FLOOR,
};
pub use scalar::{Real, Scalar};

pub use num_rational::Rational64;

pub type Predictions = PredictionMatrix<f64>;
pub type Predictions32 = PredictionMatrix<f32>;
pub type ExactPredictions = PredictionMatrix<Rational64>;

pub type Pair = PairDistribution<f64>;
pub type Pair32 = PairDistribution<f32>;
pub type ExactPair = PairDistribution<Rational64>;

pub type Report = MelepReport<f64>;
pub type Report32 = MelepReport<f32>;

pub type Weights = TargetWeights<f64>;
pub type ExactWeights = TargetWeights<Rational64>;

pub type Options = MelepOptions<f64>;

pub type F1Summary = stats::F1Report<f64>;
pub type Correlation = stats::CorrelationResult<f64>;
pub type Binning = stats::DistanceBinning<f64>;

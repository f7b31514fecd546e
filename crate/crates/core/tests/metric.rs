mod common;

use approx::assert_abs_diff_eq;
use common::*;
use melep::io::{read_label_csv, read_prediction_csv};
use melep::*;

const PREDS_A: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/instance_a_preds.csv");
const LABELS_A: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/instance_a_labels.csv");

// Frozen from tools/melep_oracle.py on the fixture files.
const MELEP_A: f64 = 0.5718594802046371;
const PHI_A: [[f64; 2]; 2] = [[0.3426157063690609, 0.6908253504403896], [0.6754587642320331, 0.5785380997770644]];
const EP_A_00: [f64; 4] = [0.7443609022556392, 0.6791979949874687, 0.22305764411027568, 0.3533834586466165];

fn fixture_a() -> (Predictions, LabelMatrix) {
    let labels = read_label_csv(LABELS_A).unwrap();
    let preds = read_prediction_csv(PREDS_A).unwrap().align_to(labels.record_ids()).unwrap();
    (preds, labels)
}

#[test]
fn instance_a_from_files_matches_frozen_values() {
    let (preds, labels) = fixture_a();
    let report = compute_melep(&preds, &labels, &Options::default()).unwrap();
    assert_abs_diff_eq!(report.melep, MELEP_A, epsilon = 1e-10);
    for y in 0..2 {
        for z in 0..2 {
            assert_abs_diff_eq!(report.phi[y][z], PHI_A[y][z], epsilon = 1e-12);
        }
    }
    assert_eq!(report.weights.weights, vec![1.0, 1.0]);
    assert_eq!(report.clamp_events, 0);
}

#[test]
fn instance_a_pair_zero_zero() {
    let (preds, labels) = fixture_a();
    let pair = compute_pair_distribution(&preds, &labels, 0, 0).unwrap();
    let expected_joint = [[0.4, 0.1], [0.075, 0.425]];
    for t in 0..2 {
        for s in 0..2 {
            assert_abs_diff_eq!(pair.joint[t][s], expected_joint[t][s], epsilon = 1e-12);
        }
    }
    assert_abs_diff_eq!(pair.marginal[0], 0.475, epsilon = 1e-12);
    assert_abs_diff_eq!(pair.marginal[1], 0.525, epsilon = 1e-12);
    let score = compute_phi(&preds, &labels, &pair).unwrap();
    assert_abs_diff_eq!(score.phi, 0.3426, epsilon = 1e-3);
    let ep = empirical_predictor_likelihood(&preds, &labels, 0, 0).unwrap();
    for (got, want) in ep.iter().zip(EP_A_00) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
    }
}

#[test]
fn instance_a_in_exact_arithmetic() {
    let inst = instance_a();
    let exact: ExactPredictions = inst.preds().cast(|v| Rational64::approximate_float(v).unwrap());
    let labels = inst.label_matrix();
    let pair = compute_pair_distribution(&exact, &labels, 0, 0).unwrap();
    assert_eq!(pair.joint[1][0], Rational64::new(3, 40));
    assert_eq!(pair.joint[0][0] + pair.joint[1][0], pair.marginal[0]);
    assert_eq!(pair.joint[0][1] + pair.joint[1][1], pair.marginal[1]);
    let w = compute_target_weights::<Rational64>(&labels, None).unwrap();
    assert_eq!(w.weights, vec![Rational64::from_integer(1); 2]);
}

#[test]
fn agrees_with_direct_summation() {
    let mut rng = seeded(11);
    for _ in 0..300 {
        let inst = random_instance(&mut rng, 30, 4);
        let report = compute_melep(&inst.preds(), &inst.label_matrix(), &Options::default()).unwrap();
        assert_abs_diff_eq!(report.melep, oracle_melep(&inst), epsilon = 1e-10);
        for y in 0..inst.y() {
            for z in 0..inst.z() {
                assert_abs_diff_eq!(report.phi[y][z], oracle_phi(&inst, y, z), epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = seeded(5);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, 30, 3);
        let p32: Predictions32 = inst.preds().cast(|v| v as f32);
        let r32 = compute_melep(&p32, &inst.label_matrix(), &MelepOptions::default()).unwrap();
        let r64 = compute_melep(&inst.preds(), &inst.label_matrix(), &Options::default()).unwrap();
        assert!((r32.melep as f64 - r64.melep).abs() < 1e-3 * (1.0 + r64.melep));
    }
}

#[test]
fn separating_and_uniform_fixtures() {
    let preds = Predictions::from_rows(vec![vec![1.0], vec![0.0]]).unwrap();
    let labels = LabelMatrix::from_rows(vec![vec![1], vec![0]]).unwrap();
    let pair = compute_pair_distribution(&preds, &labels, 0, 0).unwrap();
    assert_eq!(pair.joint, [[0.5, 0.0], [0.0, 0.5]]);
    assert_eq!(pair.conditional, [[1.0, 0.0], [0.0, 1.0]]);
    let report = compute_melep(&preds, &labels, &Options::default()).unwrap();
    assert_eq!(report.melep, 0.0);
    assert!(report.melep.is_sign_positive());
    assert_eq!(empirical_predictor_likelihood(&preds, &labels, 0, 0).unwrap(), vec![1.0, 0.0]);

    let preds = Predictions::from_rows(vec![vec![0.5]; 4]).unwrap();
    let labels = LabelMatrix::from_rows(vec![vec![1], vec![0], vec![1], vec![0]]).unwrap();
    let pair = compute_pair_distribution(&preds, &labels, 0, 0).unwrap();
    assert_eq!(pair.joint, [[0.25, 0.25], [0.25, 0.25]]);
    assert_eq!(pair.conditional, [[0.5, 0.5], [0.5, 0.5]]);
    let report = compute_melep(&preds, &labels, &Options::default()).unwrap();
    assert_abs_diff_eq!(report.melep, std::f64::consts::LN_2, epsilon = 1e-12);
    assert!(empirical_predictor_likelihood(&preds, &labels, 0, 0).unwrap().iter().all(|&p| p == 0.5));
}

#[test]
fn weight_examples() {
    let col = |v: &[u8]| LabelMatrix::from_rows(v.iter().map(|&b| vec![b]).collect()).unwrap();
    assert_eq!(compute_target_weights::<f64>(&col(&[1, 1, 0, 0]), None).unwrap().weights, vec![1.0]);
    assert_eq!(compute_target_weights::<f64>(&col(&[1, 1, 1, 0]), None).unwrap().weights, vec![3.0]);
    assert!(matches!(
        compute_target_weights::<f64>(&col(&[1, 1, 1, 1]), None),
        Err(MetricError::DegenerateLabel { index: 0, .. })
    ));
    assert_eq!(compute_target_weights::<f64>(&col(&[1, 1, 1, 1]), Some(5.0)).unwrap().weights, vec![5.0]);
    assert_eq!(compute_target_weights::<f64>(&col(&[0, 0, 0, 0]), None).unwrap().weights, vec![0.0]);
}

#[test]
fn empirical_predictor_mean_over_sources() {
    let (preds, labels) = fixture_a();
    let ep = EmpiricalPredictor::fit(&preds, &labels).unwrap();
    let proba = ep.predict_proba(&preds).unwrap();
    let p00 = empirical_predictor_likelihood(&preds, &labels, 0, 0).unwrap();
    let p01 = empirical_predictor_likelihood(&preds, &labels, 0, 1).unwrap();
    for i in 0..4 {
        assert_abs_diff_eq!(proba[i][0], 0.5 * (p00[i] + p01[i]), epsilon = 1e-15);
    }
}

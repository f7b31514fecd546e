//! Test support: a direct-summation reference for the metric and random
//! instance generators. Nothing here calls into the crate's metric code.
#![allow(dead_code)]

use melep::{LabelMatrix, PredictionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FLOOR: f64 = 1e-12;

/// A raw instance: `theta[i][z]` and `labels[i][y]`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub theta: Vec<Vec<f64>>,
    pub labels: Vec<Vec<u8>>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn z(&self) -> usize {
        self.theta[0].len()
    }

    pub fn y(&self) -> usize {
        self.labels[0].len()
    }

    pub fn preds(&self) -> PredictionMatrix<f64> {
        PredictionMatrix::from_rows(self.theta.clone()).unwrap()
    }

    pub fn label_matrix(&self) -> LabelMatrix {
        LabelMatrix::from_rows(self.labels.clone()).unwrap()
    }
}

/// Joint distribution of (target label y, dummy source label z), indexed
/// `[t][s]`, summed record by record.
pub fn oracle_joint(inst: &Instance, y: usize, z: usize) -> [[f64; 2]; 2] {
    let n = inst.n() as f64;
    let mut joint = [[0.0; 2]; 2];
    for (row, lab) in inst.theta.iter().zip(&inst.labels) {
        let t = lab[y] as usize;
        joint[t][1] += row[z];
        joint[t][0] += 1.0 - row[z];
    }
    for r in joint.iter_mut() {
        for v in r.iter_mut() {
            *v /= n;
        }
    }
    joint
}

pub fn oracle_conditional(inst: &Instance, y: usize, z: usize) -> [[f64; 2]; 2] {
    let joint = oracle_joint(inst, y, z);
    let n = inst.n() as f64;
    let m1: f64 = inst.theta.iter().map(|r| r[z]).sum::<f64>() / n;
    let m0: f64 = inst.theta.iter().map(|r| 1.0 - r[z]).sum::<f64>() / n;
    let mut cond = [[0.0; 2]; 2];
    for t in 0..2 {
        cond[t][0] = if m0 > 0.0 { joint[t][0] / m0 } else { 0.0 };
        cond[t][1] = if m1 > 0.0 { joint[t][1] / m1 } else { 0.0 };
    }
    cond
}

pub fn oracle_phi(inst: &Instance, y: usize, z: usize) -> f64 {
    let cond = oracle_conditional(inst, y, z);
    let mut total = 0.0;
    for (row, lab) in inst.theta.iter().zip(&inst.labels) {
        let t = lab[y] as usize;
        let lik = cond[t][0] * (1.0 - row[z]) + cond[t][1] * row[z];
        total += lik.max(FLOOR).ln();
    }
    -total / inst.n() as f64
}

pub fn oracle_weight(inst: &Instance, y: usize) -> f64 {
    let pos = inst.labels.iter().filter(|r| r[y] == 1).count() as f64;
    let neg = inst.n() as f64 - pos;
    pos / neg
}

pub fn oracle_melep(inst: &Instance) -> f64 {
    let mut acc = 0.0;
    for y in 0..inst.y() {
        let mut per = 0.0;
        for z in 0..inst.z() {
            per += oracle_phi(inst, y, z);
        }
        acc += oracle_weight(inst, y) * per / inst.z() as f64;
    }
    acc / inst.y() as f64
}

/// Random instance with `n <= max_n`, `Y, Z <= max_labels`; every target
/// label has at least one negative. About one entry in ten is exactly 0 or 1.
pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, max_labels: usize) -> Instance {
    let n = rng.random_range(2..=max_n);
    let z = rng.random_range(1..=max_labels);
    let y = rng.random_range(1..=max_labels);
    let theta = (0..n)
        .map(|_| {
            (0..z)
                .map(|_| match rng.random_range(0..20) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.random::<f64>(),
                })
                .collect()
        })
        .collect();
    let mut labels: Vec<Vec<u8>> = (0..n).map(|_| (0..y).map(|_| rng.random_range(0..2u8)).collect()).collect();
    for col in 0..y {
        if labels.iter().all(|r| r[col] == 1) {
            let i = rng.random_range(0..n);
            labels[i][col] = 0;
        }
    }
    Instance { theta, labels }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn instance_a() -> Instance {
    Instance {
        theta: vec![vec![0.9, 0.2], vec![0.8, 0.7], vec![0.1, 0.6], vec![0.3, 0.4]],
        labels: vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![0, 0]],
    }
}

/// Two-sided permutation test for zero correlation: the share of shuffles of
/// `ys` whose |r| reaches the observed |r|.
pub fn permutation_p_value(xs: &[f64], ys: &[f64], resamples: usize, seed: u64) -> f64 {
    fn r(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, y) in xs.iter().zip(ys) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        sxy / (sxx * syy).sqrt()
    }
    let observed = r(xs, ys).abs();
    let mut rng = seeded(seed);
    let mut shuffled = ys.to_vec();
    let mut hits = 0usize;
    for _ in 0..resamples {
        for i in (1..shuffled.len()).rev() {
            let j = rng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        if r(xs, &shuffled).abs() >= observed - 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / resamples as f64
}

pub fn gaussian_pairs(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> (Vec<f64>, Vec<f64>) {
    use rand_distr::StandardNormal;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        xs.push(a);
        ys.push(rho * a + (1.0 - rho * rho).sqrt() * b);
    }
    (xs, ys)
}

//! Seeded synthetic benchmark: a calibrated scorer over independent Gaussian
//! features with an optional planted logit bonus for one protected group.
//!
//! With `bias_bonus = 0` the protected column is pure noise to the scorer,
//! which is the null case detection must not flag.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, ProtectedSpec};
use crate::model::sigmoid;

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub n_rows: usize,
    /// Total feature count including the protected column.
    pub n_features: usize,
    /// Logit bonus granted to rows with protected value 1.
    pub bias_bonus: f64,
    /// Fraction of rows in protected group 1.
    pub group_fraction: f64,
    pub seed: u64,
}

const WEIGHTS: [f64; 8] = [0.9, -0.7, 0.55, -0.45, 0.35, 0.3, -0.25, 0.2];

/// Generate the benchmark dataset. The score column holds the true oracle
/// probability and labels are Bernoulli draws from it, so the oracle is
/// perfectly calibrated by construction.
pub fn generate(cfg: &SynthConfig) -> (Dataset, ProtectedSpec) {
    assert!(cfg.n_features >= 2, "need at least one ordinary feature");
    assert!(cfg.n_rows >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n_plain = cfg.n_features - 1;

    let mut rows = Vec::with_capacity(cfg.n_rows);
    let mut labels = Vec::with_capacity(cfg.n_rows);
    let mut scores = Vec::with_capacity(cfg.n_rows);
    for _ in 0..cfg.n_rows {
        let mut row: Vec<f64> = (0..n_plain).map(|_| normal.sample(&mut rng)).collect();
        let group = f64::from(rng.random::<f64>() < cfg.group_fraction);
        let logit: f64 = row
            .iter()
            .enumerate()
            .map(|(j, x)| WEIGHTS[j % WEIGHTS.len()] * x)
            .sum::<f64>()
            + cfg.bias_bonus * group;
        let p = sigmoid(logit);
        row.push(group);
        labels.push(u8::from(rng.random::<f64>() < p));
        scores.push(p);
        rows.push(row);
    }

    let mut names: Vec<String> = (0..n_plain).map(|j| format!("x{j}")).collect();
    names.push("group".into());
    let d = Dataset::from_parts(names, rows, labels, Some(scores)).expect("synthetic data is valid");
    let spec = ProtectedSpec::new("group", vec![0.0, 1.0], 1);
    (d, spec)
}

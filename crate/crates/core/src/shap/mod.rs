//! Shapley attributions under an interventional background-expectation value
//! function.
//!
//! Two routes compute the same quantity: [`exact_shapley`] enumerates all
//! coalitions (reference, capped at 20 features) and [`tree_shap`] walks
//! tree ensembles per background row without enumerating coalitions. Both
//! attribute in the model's raw additive score space, where the attributions
//! plus the base value reproduce the raw prediction exactly.

mod exact;
mod tree;

pub use exact::exact_shapley;
pub use tree::tree_shap;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Borrowed row-major feature matrix.
#[derive(Clone, Copy)]
pub struct RowsView<'a> {
    data: &'a [f64],
    n_features: usize,
}

impl<'a> RowsView<'a> {
    pub fn new(data: &'a [f64], n_features: usize) -> Self {
        assert!(n_features > 0 && data.len() % n_features == 0);
        RowsView { data, n_features }
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_features
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }
}

/// Anything that can be explained: a deterministic raw score per row.
///
/// For logistic ensembles this is the log-odds; attributions computed here
/// are exactly additive in that space.
pub trait RawModel: Sync {
    fn raw_score(&self, row: &[f64]) -> f64;
}

impl RawModel for crate::model::GradientBoostedModel {
    fn raw_score(&self, row: &[f64]) -> f64 {
        self.predict_raw(row)
    }
}

/// Adapter so closures can be explained in tests and experiments.
pub struct FnModel<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> RawModel for FnModel<F> {
    fn raw_score(&self, row: &[f64]) -> f64 {
        (self.0)(row)
    }
}

/// Background rows used to marginalize absent features, capped and
/// subsampled deterministically when the source exceeds `max_background`.
#[derive(Debug, Clone)]
pub struct ValueFunctionConfig {
    background: Vec<f64>,
    n_features: usize,
    n_rows: usize,
}

impl ValueFunctionConfig {
    pub fn new(background: &Dataset, max_background: usize, seed: u64) -> Result<Self> {
        let view = background.rows_view();
        Self::from_matrix(view.data, view.n_features, max_background, seed)
    }

    pub fn from_matrix(
        data: &[f64],
        n_features: usize,
        max_background: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_features == 0 || data.is_empty() || data.len() % n_features != 0 {
            return Err(Error::Validation("background must have at least one row".into()));
        }
        if max_background == 0 {
            return Err(Error::Validation("max_background must be positive".into()));
        }
        let n = data.len() / n_features;
        if n <= max_background {
            return Ok(ValueFunctionConfig {
                background: data.to_vec(),
                n_features,
                n_rows: n,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, n, max_background).into_vec();
        picked.sort_unstable();
        let mut sub = Vec::with_capacity(max_background * n_features);
        for i in picked {
            sub.extend_from_slice(&data[i * n_features..(i + 1) * n_features]);
        }
        Ok(ValueFunctionConfig {
            background: sub,
            n_features,
            n_rows: max_background,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.background[i * self.n_features..(i + 1) * self.n_features]
    }

    /// Mean raw model output over the background: the base value phi_0.
    pub fn base_value<M: RawModel + ?Sized>(&self, model: &M) -> f64 {
        let sum: f64 = (0..self.n_rows).map(|i| model.raw_score(self.row(i))).sum();
        sum / self.n_rows as f64
    }
}

/// Per-row, per-feature attributions plus the base value.
#[derive(Debug, Clone)]
pub struct ShapMatrix {
    phi: Vec<f64>,
    /// Background-mean raw prediction.
    pub phi0: f64,
    /// Raw model output per explained row.
    pub model_scores: Vec<f64>,
    pub n_rows: usize,
    pub n_features: usize,
}

impl ShapMatrix {
    pub(crate) fn from_flat(phi: Vec<f64>, phi0: f64, model_scores: Vec<f64>, n_features: usize) -> Self {
        let n_rows = model_scores.len();
        debug_assert_eq!(phi.len(), n_rows * n_features);
        ShapMatrix {
            phi,
            phi0,
            model_scores,
            n_rows,
            n_features,
        }
    }

    pub fn phi(&self, row: usize, feature: usize) -> f64 {
        self.phi[row * self.n_features + feature]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.phi[row * self.n_features..(row + 1) * self.n_features]
    }

    pub fn feature_column(&self, feature: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.phi(i, feature)).collect()
    }

    pub fn mean_abs(&self, feature: usize) -> f64 {
        self.feature_column(feature).iter().map(|v| v.abs()).sum::<f64>() / self.n_rows as f64
    }

    /// Deliberately shift one attribution (test instrumentation).
    #[doc(hidden)]
    pub fn perturb(&mut self, row: usize, feature: usize, delta: f64) {
        self.phi[row * self.n_features + feature] += delta;
    }
}

/// Max over rows of |f(x) - phi0 - sum(phi_i)|: the local-accuracy residual.
pub fn additivity_check(s: &ShapMatrix) -> f64 {
    (0..s.n_rows)
        .map(|i| {
            let total: f64 = s.row(i).iter().sum();
            (s.model_scores[i] - s.phi0 - total).abs()
        })
        .fold(0.0, f64::max)
}

/// Export attributions as CSV: row_id, one phi column per feature, phi0, score.
pub fn write_shap_csv(s: &ShapMatrix, feature_names: &[String], path: &Path, header_comment: Option<&str>) -> Result<()> {
    use std::io::Write;
    let mut out = String::new();
    if let Some(meta) = header_comment {
        out.push_str(&format!("# {meta}\n"));
    }
    out.push_str("row_id");
    for name in feature_names {
        out.push_str(&format!(",phi_{name}"));
    }
    out.push_str(",phi0,score\n");
    for i in 0..s.n_rows {
        out.push_str(&format!("{i}"));
        for j in 0..s.n_features {
            out.push_str(&format!(",{}", s.phi(i, j)));
        }
        out.push_str(&format!(",{},{}\n", s.phi0, s.model_scores[i]));
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
pub struct ShapSummary {
    pub phi0: f64,
    pub n_rows: usize,
    pub additivity_residual: f64,
    pub mean_abs_phi: std::collections::BTreeMap<String, f64>,
}

pub fn summarize(s: &ShapMatrix, feature_names: &[String]) -> ShapSummary {
    let mean_abs_phi = feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| (name.clone(), s.mean_abs(j)))
        .collect();
    ShapSummary {
        phi0: s.phi0,
        n_rows: s.n_rows,
        additivity_residual: additivity_check(s),
        mean_abs_phi,
    }
}

/// Factorials as f64, used by both attribution routes.
pub(crate) fn factorials(upto: usize) -> Vec<f64> {
    let mut f = vec![1.0; upto + 1];
    for i in 1..=upto {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn background_subsampling_is_deterministic_and_capped() {
        let data: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let a = ValueFunctionConfig::from_matrix(&data, 2, 10, 3).unwrap();
        let b = ValueFunctionConfig::from_matrix(&data, 2, 10, 3).unwrap();
        assert_eq!(a.n_rows(), 10);
        for i in 0..10 {
            assert_eq!(a.row(i), b.row(i));
        }
        let c = ValueFunctionConfig::from_matrix(&data, 2, 100, 3).unwrap();
        assert_eq!(c.n_rows(), 50);
    }

    #[test]
    fn additivity_flags_an_injected_fault() {
        let mut s = ShapMatrix::from_flat(vec![0.2, -0.1], 0.5, vec![0.6], 2);
        assert!(additivity_check(&s) < 1e-15);
        s.perturb(0, 1, 0.1);
        assert!((additivity_check(&s) - 0.1).abs() < 1e-12);
    }
}

//! Group-fairness criteria restated over the protected attribute's Shapley
//! attribution distributions, quantified with distribution distances and
//! judged against a permutation-randomized baseline.

mod baseline;
mod distance;

pub use baseline::{randomized_baseline, BaselinePipeline, CriterionBaselines};
pub use distance::{kl_divergence, wasserstein1};

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ProtectedSpec};
use crate::error::{Error, Result};
use crate::shap::ShapMatrix;

/// Distance between two empirical 1-D distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DistanceKind {
    Wasserstein1,
    Kl {
        n_bins: usize,
        /// Smoothing mass per bin; defaults to 1/(n_bins * pooled count).
        epsilon: Option<f64>,
    },
}

impl DistanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DistanceKind::Wasserstein1 => "wasserstein1",
            DistanceKind::Kl { .. } => "kl",
        }
    }

    pub fn measure(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        match self {
            DistanceKind::Wasserstein1 => wasserstein1(u, v),
            DistanceKind::Kl { n_bins, epsilon } => {
                let eps = epsilon
                    .unwrap_or_else(|| 1.0 / (*n_bins as f64 * (u.len() + v.len()) as f64));
                kl_divergence(u, v, *n_bins, eps)
            }
        }
    }
}

/// The protected attribute's attributions for one (group, outcome) slice.
#[derive(Debug, Clone)]
pub struct GroupSlice {
    pub group: f64,
    /// `None` means any outcome.
    pub outcome: Option<u8>,
    pub phi_values: Vec<f64>,
}

/// Extract the slice, failing loudly when it is empty.
pub fn group_slice(
    s: &ShapMatrix,
    d: &Dataset,
    spec: &ProtectedSpec,
    group: f64,
    outcome: Option<u8>,
) -> Result<GroupSlice> {
    let col = spec.validate(d)?;
    if s.n_rows != d.n_rows {
        return Err(Error::Validation(
            "attribution matrix and dataset row counts differ".into(),
        ));
    }
    let phi_values: Vec<f64> = (0..d.n_rows)
        .filter(|&i| d.row(i)[col] == group && outcome.is_none_or(|y| d.label[i] == y))
        .map(|i| s.phi(i, col))
        .collect();
    if phi_values.is_empty() {
        return Err(Error::Validation(format!(
            "no rows for group {} with outcome {}",
            d.decode(&spec.column, group),
            outcome.map_or("any".to_string(), |y| y.to_string())
        )));
    }
    Ok(GroupSlice {
        group,
        outcome,
        phi_values,
    })
}

/// Demographic parity statistic: mean |phi_A| over all rows.
///
/// Zero when the model never reads the protected attribute; a value
/// significantly above the randomized baseline flags a parity violation.
pub fn demographic_parity_score(s: &ShapMatrix, d: &Dataset, spec: &ProtectedSpec) -> Result<f64> {
    let col = spec.validate(d)?;
    if s.n_rows != d.n_rows {
        return Err(Error::Validation(
            "attribution matrix and dataset row counts differ".into(),
        ));
    }
    Ok(s.mean_abs(col))
}

/// Max pairwise distance between group-conditional phi_A distributions for
/// the given outcome slice. With two groups this is just their distance.
fn sliced_distance(
    s: &ShapMatrix,
    d: &Dataset,
    spec: &ProtectedSpec,
    outcome: Option<u8>,
    kind: DistanceKind,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, &a) in spec.groups.iter().enumerate() {
        for &b in &spec.groups[i + 1..] {
            let u = group_slice(s, d, spec, a, outcome)?;
            let v = group_slice(s, d, spec, b, outcome)?;
            worst = worst.max(kind.measure(&u.phi_values, &v.phi_values)?);
        }
    }
    Ok(worst)
}

/// Equality-of-opportunity statistic: distance between the groups'
/// phi_A distributions among rows with the favorable true outcome.
pub fn equality_of_opportunity_score(
    s: &ShapMatrix,
    d: &Dataset,
    spec: &ProtectedSpec,
    kind: DistanceKind,
) -> Result<f64> {
    sliced_distance(s, d, spec, Some(spec.favorable_outcome), kind)
}

/// Equalized-odds statistic: one distance per true outcome.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EqualizedOdds {
    pub y0: f64,
    pub y1: f64,
}

pub fn equalized_odds_score(
    s: &ShapMatrix,
    d: &Dataset,
    spec: &ProtectedSpec,
    kind: DistanceKind,
) -> Result<EqualizedOdds> {
    Ok(EqualizedOdds {
        y0: sliced_distance(s, d, spec, Some(0), kind)?,
        y1: sliced_distance(s, d, spec, Some(1), kind)?,
    })
}

/// Summary of a criterion statistic across the K baseline permutations.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BaselineStats {
    pub mean: f64,
    pub max: f64,
    pub values: Vec<f64>,
}

impl BaselineStats {
    pub fn from_values(values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let max = values.iter().fold(f64::MIN, |a, &b| a.max(b));
        BaselineStats { mean, max, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Violation,
    NoEvidence,
}

/// Ratio test against the baseline: violation iff
/// `metric > ratio_threshold * max(baseline.mean, floor)` (strict).
///
/// The floor guards against a degenerate near-zero baseline blowing up the
/// ratio.
pub fn verdict(metric: f64, baseline: &BaselineStats, ratio_threshold: f64, floor: f64) -> Verdict {
    if metric > ratio_threshold * baseline.mean.max(floor) {
        Verdict::Violation
    } else {
        Verdict::NoEvidence
    }
}

/// The ratio the verdict is based on.
pub fn baseline_ratio(metric: f64, baseline: &BaselineStats, floor: f64) -> f64 {
    metric / baseline.mean.max(floor)
}

//! Ranking and calibration metrics used to qualify the model under audit.

use serde::Serialize;

use crate::error::{Error, Result};

/// Area under the ROC curve via the Mann-Whitney statistic.
///
/// Equals the probability that a uniformly random positive outscores a
/// uniformly random negative, counting ties as 1/2.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Validation("scores and labels differ in length".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Validation(
            "auc needs both classes present in labels".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Average ranks over tied scores, then use the positive rank sum.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j + 1) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Coefficient of determination of `pred` against `target`.
pub fn r_squared(pred: &[f64], target: &[f64]) -> f64 {
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let ss_tot: f64 = target.iter().map(|t| (t - mean) * (t - mean)).sum();
    let ss_res: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    if ss_tot == 0.0 {
        // Constant target: perfect iff residuals vanish.
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean_score: f64,
    pub positive_rate: f64,
}

impl CalibrationBin {
    /// |mean predicted probability - empirical positive rate| for the bin.
    pub fn gap(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.mean_score - self.positive_rate).abs()
        }
    }
}

/// Equal-width reliability table on [0, 1]. Empty bins carry count 0.
pub fn calibration_table(scores: &[f64], labels: &[u8], n_bins: usize) -> Result<Vec<CalibrationBin>> {
    if n_bins < 2 {
        return Err(Error::Validation("calibration needs at least 2 bins".into()));
    }
    if scores.len() != labels.len() {
        return Err(Error::Validation("scores and labels differ in length".into()));
    }
    let width = 1.0 / n_bins as f64;
    let mut sums = vec![0.0; n_bins];
    let mut pos = vec![0usize; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (&s, &y) in scores.iter().zip(labels) {
        let b = ((s / width) as usize).min(n_bins - 1);
        sums[b] += s;
        pos[b] += usize::from(y == 1);
        counts[b] += 1;
    }
    Ok((0..n_bins)
        .map(|b| CalibrationBin {
            lo: b as f64 * width,
            hi: (b + 1) as f64 * width,
            count: counts[b],
            mean_score: if counts[b] == 0 { 0.0 } else { sums[b] / counts[b] as f64 },
            positive_rate: if counts[b] == 0 { 0.0 } else { pos[b] as f64 / counts[b] as f64 },
        })
        .collect())
}

//! Distances between empirical 1-D distributions.

use crate::error::{Error, Result};

/// First Wasserstein distance between two empirical distributions, computed
/// as the integral of |F_u - F_v| over the pooled support (the sorted-CDF
/// method). Handles samples of different sizes.
pub fn wasserstein1(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::Validation("wasserstein1 requires non-empty samples".into()));
    }
    let mut su = u.to_vec();
    let mut sv = v.to_vec();
    su.sort_by(f64::total_cmp);
    sv.sort_by(f64::total_cmp);

    let mut pooled = Vec::with_capacity(su.len() + sv.len());
    pooled.extend_from_slice(&su);
    pooled.extend_from_slice(&sv);
    pooled.sort_by(f64::total_cmp);

    let nu = su.len() as f64;
    let nv = sv.len() as f64;
    let mut total = 0.0;
    for w in pooled.windows(2) {
        let dt = w[1] - w[0];
        if dt > 0.0 {
            let fu = su.partition_point(|&x| x <= w[0]) as f64 / nu;
            let fv = sv.partition_point(|&x| x <= w[0]) as f64 / nv;
            total += (fu - fv).abs() * dt;
        }
    }
    Ok(total)
}

/// Kullback-Leibler divergence D(P_u || P_v) between histogram estimates on
/// a shared equal-width binning over the pooled range, with `epsilon`
/// smoothing mass added to every bin before normalization so disjoint
/// supports stay finite.
pub fn kl_divergence(u: &[f64], v: &[f64], n_bins: usize, epsilon: f64) -> Result<f64> {
    if n_bins < 2 {
        return Err(Error::Validation("kl divergence needs at least 2 bins".into()));
    }
    if u.is_empty() || v.is_empty() {
        return Err(Error::Validation("kl divergence requires non-empty samples".into()));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Validation("smoothing epsilon must be positive".into()));
    }
    let lo = u.iter().chain(v).fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = u.iter().chain(v).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if lo == hi {
        return Ok(0.0); // both samples concentrate on a single point
    }
    let width = (hi - lo) / n_bins as f64;
    let bin_of = |x: f64| (((x - lo) / width) as usize).min(n_bins - 1);

    let mut cu = vec![0usize; n_bins];
    let mut cv = vec![0usize; n_bins];
    for &x in u {
        cu[bin_of(x)] += 1;
    }
    for &x in v {
        cv[bin_of(x)] += 1;
    }
    let zu = u.len() as f64 + n_bins as f64 * epsilon;
    let zv = v.len() as f64 + n_bins as f64 * epsilon;
    let mut kl = 0.0;
    for b in 0..n_bins {
        let p = (cu[b] as f64 + epsilon) / zu;
        let q = (cv[b] as f64 + epsilon) / zv;
        kl += p * (p / q).ln();
    }
    // Gibbs' inequality guarantees kl >= 0; clamp away float dust so callers
    // can rely on the sign.
    Ok(kl.max(0.0))
}

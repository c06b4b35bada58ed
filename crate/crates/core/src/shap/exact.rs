//! Reference Shapley computation by full coalition enumeration.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{factorials, RawModel, RowsView, ShapMatrix, ValueFunctionConfig};

/// Hard cap: 2^20 coalition evaluations per row is the most this route will do.
const MAX_FEATURES: usize = 20;

/// Exact Shapley attributions for any raw-score model.
///
/// For every row and feature i,
/// `phi_i = sum over coalitions S without i of |S|!(M-|S|-1)!/M! * (v(S+i) - v(S))`
/// where `v(S)` replaces features outside `S` with background values and
/// averages the model output over the background rows.
pub fn exact_shapley<M: RawModel + ?Sized>(
    model: &M,
    rows: RowsView<'_>,
    vf: &ValueFunctionConfig,
) -> Result<ShapMatrix> {
    let m = rows.n_features();
    if rows.n_rows() == 0 {
        return Err(Error::Validation("no rows to explain".into()));
    }
    if m > MAX_FEATURES {
        return Err(Error::Capability(format!(
            "exact enumeration over {m} features exceeds the {MAX_FEATURES}-feature cap; use tree_shap"
        )));
    }
    if vf.n_features() != m {
        return Err(Error::Validation(format!(
            "background has {} features, rows have {m}",
            vf.n_features()
        )));
    }

    let fact = factorials(m);
    // weight[k] = k! (M-k-1)! / M! for a coalition of size k
    let weights: Vec<f64> = (0..m).map(|k| fact[k] * fact[m - k - 1] / fact[m]).collect();
    let n_masks = 1usize << m;

    let phi_rows: Vec<(Vec<f64>, f64)> = (0..rows.n_rows())
        .into_par_iter()
        .map(|r| {
            let x = rows.row(r);
            let mut v = vec![0.0; n_masks];
            let mut hybrid = vec![0.0; m];
            for z_idx in 0..vf.n_rows() {
                let z = vf.row(z_idx);
                hybrid.copy_from_slice(z);
                let mut prev = 0usize;
                // Gray-code walk: exactly one feature flips between steps.
                for i in 0..n_masks {
                    let mask = i ^ (i >> 1);
                    if i > 0 {
                        let bit = (mask ^ prev).trailing_zeros() as usize;
                        hybrid[bit] = if mask & (1 << bit) != 0 { x[bit] } else { z[bit] };
                    }
                    v[mask] += model.raw_score(&hybrid);
                    prev = mask;
                }
            }
            let scale = 1.0 / vf.n_rows() as f64;
            for val in v.iter_mut() {
                *val *= scale;
            }

            let mut phi = vec![0.0; m];
            for (feature, phi_f) in phi.iter_mut().enumerate() {
                let bit = 1usize << feature;
                let mut acc = 0.0;
                for mask in 0..n_masks {
                    if mask & bit == 0 {
                        acc += weights[(mask as u64).count_ones() as usize] * (v[mask | bit] - v[mask]);
                    }
                }
                *phi_f = acc;
            }
            (phi, v[n_masks - 1])
        })
        .collect();

    let phi0 = vf.base_value(model);
    let mut phi = Vec::with_capacity(rows.n_rows() * m);
    let mut scores = Vec::with_capacity(rows.n_rows());
    for (row_phi, fx) in phi_rows {
        phi.extend_from_slice(&row_phi);
        scores.push(fx);
    }
    Ok(ShapMatrix::from_flat(phi, phi0, scores, m))
}

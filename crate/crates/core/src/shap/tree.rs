//! Interventional Shapley attributions for tree ensembles without coalition
//! enumeration.
//!
//! For each explained row x and background row z, a tree is walked once.
//! At a split the two rows either agree (single child) or diverge, in which
//! case the split feature becomes a committed "player": following x's side
//! requires the feature in the coalition, z's side requires it absent.
//! Reaching a leaf therefore pins an exact set A of x-committed and B of
//! z-committed features, and the leaf's Shapley contribution has the closed
//! form
//!
//! ```text
//!   i in A:  +leaf * (a-1)! b! / (a+b)!
//!   i in B:  -leaf * a! (b-1)! / (a+b)!
//! ```
//!
//! with a = |A|, b = |B| (dummy features cancel). Summing over leaves,
//! background rows, and trees yields exactly the coalition-enumeration
//! result for the same background, which is what the equivalence tests pin.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{GradientBoostedModel, Node};

use super::{factorials, RawModel, RowsView, ShapMatrix, ValueFunctionConfig};

/// Shapley attributions of a tree ensemble, identical (up to float rounding)
/// to [`super::exact_shapley`] under the same background.
pub fn tree_shap(
    model: &GradientBoostedModel,
    rows: RowsView<'_>,
    vf: &ValueFunctionConfig,
) -> Result<ShapMatrix> {
    let m = rows.n_features();
    if rows.n_rows() == 0 {
        return Err(Error::Validation("no rows to explain".into()));
    }
    if model.n_features != m || vf.n_features() != m {
        return Err(Error::Validation(format!(
            "feature counts disagree: rows {m}, model {}, background {}",
            model.n_features,
            vf.n_features()
        )));
    }
    let max_depth = model.trees.iter().map(|t| t.depth()).max().unwrap_or(0);
    let fact = factorials(max_depth + 1);

    let phi_rows: Vec<Vec<f64>> = (0..rows.n_rows())
        .into_par_iter()
        .map(|r| {
            let x = rows.row(r);
            let mut phi = vec![0.0; m];
            let mut path: Vec<(usize, bool)> = Vec::with_capacity(max_depth);
            for z_idx in 0..vf.n_rows() {
                let z = vf.row(z_idx);
                for tree in &model.trees {
                    walk(&tree.nodes, 0, x, z, &mut path, &mut phi, model.learning_rate, &fact);
                    debug_assert!(path.is_empty());
                }
            }
            let scale = 1.0 / vf.n_rows() as f64;
            for v in phi.iter_mut() {
                *v *= scale;
            }
            phi
        })
        .collect();

    let phi0 = vf.base_value(model);
    let scores: Vec<f64> = (0..rows.n_rows()).map(|r| model.raw_score(rows.row(r))).collect();
    let mut phi = Vec::with_capacity(rows.n_rows() * m);
    for row_phi in phi_rows {
        phi.extend_from_slice(&row_phi);
    }
    Ok(ShapMatrix::from_flat(phi, phi0, scores, m))
}

/// Depth-first walk accumulating attributions for one (x, z, tree) triple.
///
/// `path` holds the committed features as (feature, committed_to_x) pairs;
/// a feature appears at most once because repeated splits on a committed
/// feature are routed by its committed source.
fn walk(
    nodes: &[Node],
    node: usize,
    x: &[f64],
    z: &[f64],
    path: &mut Vec<(usize, bool)>,
    phi: &mut [f64],
    scale: f64,
    fact: &[f64],
) {
    match nodes[node] {
        Node::Leaf { value } => {
            let a = path.iter().filter(|(_, from_x)| *from_x).count();
            let b = path.len() - a;
            if a + b == 0 {
                return; // reached by both rows under every coalition
            }
            let denom = fact[a + b];
            let w_plus = if a > 0 { fact[a - 1] * fact[b] / denom } else { 0.0 };
            let w_minus = if b > 0 { fact[a] * fact[b - 1] / denom } else { 0.0 };
            let v = scale * value;
            for &(feature, from_x) in path.iter() {
                if from_x {
                    phi[feature] += v * w_plus;
                } else {
                    phi[feature] -= v * w_minus;
                }
            }
        }
        Node::Split {
            feature_index,
            threshold,
            left,
            right,
        } => {
            if let Some(&(_, from_x)) = path.iter().find(|(f, _)| *f == feature_index) {
                let v = if from_x { x[feature_index] } else { z[feature_index] };
                let child = if v <= threshold { left } else { right };
                walk(nodes, child, x, z, path, phi, scale, fact);
                return;
            }
            let x_left = x[feature_index] <= threshold;
            let z_left = z[feature_index] <= threshold;
            if x_left == z_left {
                let child = if x_left { left } else { right };
                walk(nodes, child, x, z, path, phi, scale, fact);
            } else {
                path.push((feature_index, true));
                walk(nodes, if x_left { left } else { right }, x, z, path, phi, scale, fact);
                path.pop();
                path.push((feature_index, false));
                walk(nodes, if z_left { left } else { right }, x, z, path, phi, scale, fact);
                path.pop();
            }
        }
    }
}

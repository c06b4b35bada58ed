//! Post-processing mitigation for a calibrated classifier: equalize a
//! weighted false-positive/false-negative cost across two protected groups
//! by setting a fraction alpha of the lower-cost group's predictions to that
//! group's base rate. The individuals to adjust are chosen either uniformly
//! at random (the classical baseline) or by attribution quadrant, which
//! targets the people most advantaged or most harmed by the protected
//! attribute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sigmoid, Objective};

/// Weights of the generalized false-positive and false-negative costs in
/// the fairness constraint `g = (w_fp * c_fp + w_fn * c_fn) / (w_fp + w_fn)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CostSpec {
    pub w_fp: f64,
    pub w_fn: f64,
}

impl CostSpec {
    pub fn equal() -> Self {
        CostSpec { w_fp: 1.0, w_fn: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_fp < 0.0 || self.w_fn < 0.0 || self.w_fp + self.w_fn <= 0.0 {
            return Err(Error::Validation(
                "cost weights must be nonnegative with a positive sum".into(),
            ));
        }
        Ok(())
    }

    /// Weighted cost of a classifier with the given generalized error costs.
    pub fn weighted(&self, c_fp: f64, c_fn: f64) -> f64 {
        (self.w_fp * c_fp + self.w_fn * c_fn) / (self.w_fp + self.w_fn)
    }
}

/// Soft error costs and summary statistics of one protected group.
///
/// `c_fp` is the mean score over true negatives and `c_fn` the mean
/// complement score over true positives (generalized, not thresholded,
/// costs); `accuracy` thresholds at 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: f64,
    pub n: usize,
    pub base_rate: f64,
    pub c_fp: f64,
    pub c_fn: f64,
    pub accuracy: f64,
    pub avg_score: f64,
}

impl GroupStats {
    pub fn weighted_cost(&self, cost: &CostSpec) -> f64 {
        cost.weighted(self.c_fp, self.c_fn)
    }

    /// Weighted cost of the trivial classifier that always predicts the
    /// group base rate: c_fp = mu, c_fn = 1 - mu.
    pub fn base_rate_cost(&self, cost: &CostSpec) -> f64 {
        cost.weighted(self.base_rate, 1.0 - self.base_rate)
    }
}

/// Compute [`GroupStats`] for the rows whose protected value equals `group`.
pub fn group_stats(
    scores: &[f64],
    labels: &[u8],
    protected: &[f64],
    group: f64,
) -> Result<GroupStats> {
    if scores.len() != labels.len() || labels.len() != protected.len() {
        return Err(Error::Validation("score/label/protected lengths differ".into()));
    }
    let mut n = 0usize;
    let mut n_pos = 0usize;
    let mut fp_sum = 0.0;
    let mut fn_sum = 0.0;
    let mut correct = 0usize;
    let mut score_sum = 0.0;
    for i in 0..scores.len() {
        if protected[i] != group {
            continue;
        }
        n += 1;
        score_sum += scores[i];
        let predicted_pos = scores[i] >= 0.5;
        if labels[i] == 1 {
            n_pos += 1;
            fn_sum += 1.0 - scores[i];
            correct += usize::from(predicted_pos);
        } else {
            fp_sum += scores[i];
            correct += usize::from(!predicted_pos);
        }
    }
    if n == 0 {
        return Err(Error::Validation(format!("group {group} has no rows")));
    }
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Validation(format!(
            "group {group} has a single outcome class; error costs are undefined"
        )));
    }
    Ok(GroupStats {
        group,
        n,
        base_rate: n_pos as f64 / n as f64,
        c_fp: fp_sum / n_neg as f64,
        c_fn: fn_sum / n_pos as f64,
        accuracy: correct as f64 / n as f64,
        avg_score: score_sum / n as f64,
    })
}

/// Mixing rate alpha such that interpolating the group's classifier with its
/// base-rate predictor reaches `target` in expected weighted cost:
/// `alpha = (target - g(h_t)) / (g(mu_t) - g(h_t))`, clamped into [0, 1].
pub fn compute_alpha(low: &GroupStats, target: f64, cost: &CostSpec) -> Result<f64> {
    cost.validate()?;
    let g_h = low.weighted_cost(cost);
    let g_mu = low.base_rate_cost(cost);
    let lo = g_h.min(g_mu);
    let hi = g_h.max(g_mu);
    const TOL: f64 = 1e-12;
    if target < lo - TOL || target > hi + TOL {
        return Err(Error::Infeasible(format!(
            "target cost {target:.6} unreachable by mixing: group cost {g_h:.6}, base-rate cost {g_mu:.6}"
        )));
    }
    if (g_mu - g_h).abs() <= TOL {
        return Ok(0.0);
    }
    Ok(((target - g_h) / (g_mu - g_h)).clamp(0.0, 1.0))
}

/// Round half away from zero, so |D_u| is reproducible across platforms.
pub fn round_count(x: f64) -> usize {
    x.abs().round() as usize
}

/// Uniformly random subset of `round(alpha * n)` group rows, deterministic
/// per seed. Returned indices are sorted ascending.
pub fn random_select(group_rows: &[usize], alpha: f64, seed: u64) -> Vec<usize> {
    let n = round_count(alpha * group_rows.len() as f64).min(group_rows.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, group_rows.len(), n)
        .into_iter()
        .map(|i| group_rows[i])
        .collect();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MitigationDistance {
    /// |phi_A|: the protected attribute's own contribution.
    ShapOnly,
    /// Contribution of everything except the protected attribute, measured
    /// in prediction space relative to the base rate.
    NonProtected,
}

/// One candidate individual in the (phi_A, prediction) plane with origin
/// (0, base rate).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadrantPoint {
    pub row: usize,
    /// Raw-space attribution of the protected attribute.
    pub shap: f64,
    /// Prediction in [0, 1].
    pub pred: f64,
    pub quadrant: u8,
    pub distance: f64,
}

/// Quadrant assignment. Boundaries go to the non-positive side on both
/// axes: a zero attribution never counts as a beneficiary, and a prediction
/// at the base rate counts as below it.
pub fn quadrant_of(shap: f64, pred: f64, mu: f64) -> u8 {
    match (shap > 0.0, pred > mu) {
        (true, true) => 1,
        (false, true) => 2,
        (false, false) => 3,
        (true, false) => 4,
    }
}

/// Distance of a point from the quadrant origin under the chosen measure.
///
/// For `NonProtected` the raw-space attribution is mapped into prediction
/// space as `sigmoid(raw) - sigmoid(raw - shap)` (identity for squared
/// models, whose raw space already is the prediction space), so the
/// subtraction from `pred - mu` is dimensionally consistent.
pub fn point_distance(
    shap: f64,
    raw_score: f64,
    pred: f64,
    mu: f64,
    kind: MitigationDistance,
    objective: Objective,
) -> f64 {
    match kind {
        MitigationDistance::ShapOnly => shap.abs(),
        MitigationDistance::NonProtected => {
            let contribution_pred = match objective {
                Objective::Logistic => sigmoid(raw_score) - sigmoid(raw_score - shap),
                Objective::Squared => shap,
            };
            ((pred - mu) - contribution_pred).abs()
        }
    }
}

/// Build the quadrant points for the candidate rows of the modified group.
pub fn build_points(
    rows: &[usize],
    phi_a: &[f64],
    raw_scores: &[f64],
    preds: &[f64],
    mu: f64,
    kind: MitigationDistance,
    objective: Objective,
) -> Vec<QuadrantPoint> {
    rows.iter()
        .map(|&i| QuadrantPoint {
            row: i,
            shap: phi_a[i],
            pred: preds[i],
            quadrant: quadrant_of(phi_a[i], preds[i], mu),
            distance: point_distance(phi_a[i], raw_scores[i], preds[i], mu, kind, objective),
        })
        .collect()
}

/// Partition point indices by quadrant (positions into `points`).
pub fn quadrant_partition(points: &[QuadrantPoint]) -> [Vec<usize>; 4] {
    let mut quads: [Vec<usize>; 4] = Default::default();
    for (i, p) in points.iter().enumerate() {
        quads[(p.quadrant - 1) as usize].push(i);
    }
    quads
}

/// Select the `round(alpha * n)` individuals whose predictions move to the
/// base rate: first the largest-distance points of quadrants 1 and 3 (most
/// affected by the protected attribute, favorably or unfavorably), then, if
/// more are needed, the smallest-distance points of quadrants 2 and 4.
/// Ties break by ascending row index. Returns sorted row indices.
pub fn find_individuals(points: &[QuadrantPoint], alpha: f64) -> Vec<usize> {
    let n = round_count(alpha * points.len() as f64).min(points.len());
    let mut primary: Vec<&QuadrantPoint> = points
        .iter()
        .filter(|p| p.quadrant == 1 || p.quadrant == 3)
        .collect();
    primary.sort_by(|a, b| b.distance.total_cmp(&a.distance).then(a.row.cmp(&b.row)));
    let mut rest: Vec<&QuadrantPoint> = points
        .iter()
        .filter(|p| p.quadrant == 2 || p.quadrant == 4)
        .collect();
    rest.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.row.cmp(&b.row)));

    let mut selected: Vec<usize> = primary
        .iter()
        .take(n)
        .chain(rest.iter().take(n.saturating_sub(primary.len())))
        .map(|p| p.row)
        .collect();
    selected.sort_unstable();
    selected
}

/// Set the selected rows' scores to the group base rate; everything else is
/// returned bit-identical.
pub fn apply_mitigation(
    scores: &[f64],
    d_u: &[usize],
    mu: f64,
    group_rows: &[usize],
) -> Result<Vec<f64>> {
    let allowed: std::collections::HashSet<usize> = group_rows.iter().copied().collect();
    let mut out = scores.to_vec();
    for &i in d_u {
        if !allowed.contains(&i) {
            return Err(Error::Validation(format!(
                "selected row {i} is outside the modified group"
            )));
        }
        out[i] = mu;
    }
    Ok(out)
}

/// Which group gets modified and what the mixing has to achieve.
#[derive(Debug, Clone, Serialize)]
pub struct MitigationPlan {
    /// The lower-cost group, whose predictions are adjusted.
    pub modified_group: f64,
    pub other_group: f64,
    /// The higher group cost the mixing must reach.
    pub target_cost: f64,
    pub alpha: f64,
    pub n_selected: usize,
}

/// Decide the direction of mitigation from the two groups' weighted costs.
/// The lower-cost (advantaged) group is degraded toward the higher cost.
pub fn plan_mitigation(a: &GroupStats, b: &GroupStats, cost: &CostSpec) -> Result<MitigationPlan> {
    cost.validate()?;
    let (low, high) = if a.weighted_cost(cost) <= b.weighted_cost(cost) {
        (a, b)
    } else {
        (b, a)
    };
    let target = high.weighted_cost(cost);
    let alpha = compute_alpha(low, target, cost)?;
    Ok(MitigationPlan {
        modified_group: low.group,
        other_group: high.group,
        target_cost: target,
        alpha,
        n_selected: round_count(alpha * low.n as f64).min(low.n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Random,
    Quadrant,
}

/// Outcome of one mitigation variant. Group stats arrays follow the
/// declared group order.
#[derive(Debug, Clone, Serialize)]
pub struct MitigationResult {
    pub method: SelectionMethod,
    pub alpha: f64,
    pub target_cost: f64,
    pub modified_group: f64,
    pub modified_indices: Vec<usize>,
    #[serde(skip)]
    pub new_scores: Vec<f64>,
    pub per_group_stats_before: [GroupStats; 2],
    pub per_group_stats_after: [GroupStats; 2],
    pub cost_gap_before: f64,
    pub cost_gap_after: f64,
}

/// One row of the comparison table: a metric for one group across the
/// original and both post-processed classifiers.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub metric: String,
    pub group: f64,
    pub before: f64,
    pub random: f64,
    pub quadrant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MitigationTable {
    pub rows: Vec<TableRow>,
    pub cost_gap_before: f64,
    pub cost_gap_random: f64,
    pub cost_gap_quadrant: f64,
}

/// Assemble the five-metric comparison across both groups and all three
/// classifier variants.
pub fn mitigation_report(
    before: &[GroupStats; 2],
    after_random: &[GroupStats; 2],
    after_quadrant: &[GroupStats; 2],
    cost: &CostSpec,
) -> MitigationTable {
    let mut rows = Vec::new();
    let metrics: [(&str, fn(&GroupStats) -> f64); 5] = [
        ("accuracy", |g| g.accuracy),
        ("fp_cost", |g| g.c_fp),
        ("fn_cost", |g| g.c_fn),
        ("base_rate", |g| g.base_rate),
        ("avg_score", |g| g.avg_score),
    ];
    for (name, get) in metrics {
        for i in 0..2 {
            rows.push(TableRow {
                metric: name.to_string(),
                group: before[i].group,
                before: get(&before[i]),
                random: get(&after_random[i]),
                quadrant: get(&after_quadrant[i]),
            });
        }
    }
    let gap = |pair: &[GroupStats; 2]| {
        (pair[0].weighted_cost(cost) - pair[1].weighted_cost(cost)).abs()
    };
    MitigationTable {
        rows,
        cost_gap_before: gap(before),
        cost_gap_random: gap(after_random),
        cost_gap_quadrant: gap(after_quadrant),
    }
}

//! Config-driven end-to-end runs: audit, baseline, and mitigation commands
//! producing deterministic JSON reports and plot-data CSVs.

mod config;

pub use config::{
    AuditConfig, DataConfig, DetectConfig, DistanceName, MimicConfig, MitigateConfig, Mode,
    OracleConfig, Overrides, ShapConfig,
};

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::{load_csv, Dataset, ProtectedSpec};
use crate::detect::{
    baseline_ratio, demographic_parity_score, equality_of_opportunity_score, equalized_odds_score,
    randomized_baseline, verdict, BaselinePipeline, BaselineStats, CriterionBaselines, Verdict,
};
use crate::error::{Error, Result};
use crate::mitigate::{
    apply_mitigation, build_points, find_individuals, group_stats, mitigation_report,
    plan_mitigation, random_select, MitigationResult, MitigationTable, QuadrantPoint,
    SelectionMethod,
};
use crate::model::{
    auc, calibration_table, distill_on_targets, BlackBoxOracle, GradientBoostedModel, Objective,
};
use crate::shap::{
    additivity_check, summarize, tree_shap, write_shap_csv, ShapMatrix, ValueFunctionConfig,
};

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;
const HIST_BINS: usize = 30;

/// Provenance header embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub config_hash: String,
    pub tool_version: String,
    pub mode: String,
    /// Attributions are computed in-sample on the full audit set.
    pub in_sample_shap: bool,
}

impl Meta {
    fn new(cfg: &AuditConfig) -> Self {
        Meta {
            config_hash: cfg.config_hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            mode: cfg.mode.name().to_string(),
            in_sample_shap: true,
        }
    }

    fn csv_comment(&self) -> String {
        format!(
            "config_hash={} tool_version={} mode={}",
            self.config_hash, self.tool_version, self.mode
        )
    }
}

/// Model access resolved: the training targets and the mimic objective.
struct ResolvedTargets {
    targets: Vec<f64>,
    objective: Objective,
}

fn resolve_targets(cfg: &AuditConfig, d: &Dataset) -> Result<ResolvedTargets> {
    match cfg.mode {
        Mode::Whitebox => Ok(ResolvedTargets {
            targets: d.label.iter().map(|&y| y as f64).collect(),
            objective: Objective::Logistic,
        }),
        Mode::BlackboxColumn => {
            let targets = BlackBoxOracle::ScoreColumn.query(d)?;
            let objective = objective_for(&targets);
            Ok(ResolvedTargets { targets, objective })
        }
        Mode::BlackboxSubprocess => {
            let oracle_cfg = cfg
                .oracle
                .as_ref()
                .ok_or_else(|| Error::Config("missing [oracle] section".into()))?;
            let oracle = BlackBoxOracle::Subprocess {
                command: oracle_cfg.command.clone(),
                batch_size: oracle_cfg.batch_size,
            };
            let targets = oracle.query(d)?;
            let objective = objective_for(&targets);
            Ok(ResolvedTargets { targets, objective })
        }
    }
}

fn objective_for(targets: &[f64]) -> Objective {
    if targets.iter().all(|&t| t == 0.0 || t == 1.0) {
        Objective::Logistic
    } else {
        Objective::Squared
    }
}

/// Loaded data plus the trained (or distilled) model under audit.
pub struct PreparedAudit {
    pub dataset: Dataset,
    pub spec: ProtectedSpec,
    pub model: GradientBoostedModel,
    pub targets: Vec<f64>,
    pub objective: Objective,
    pub fidelity_r2: Option<f64>,
    pub agreement: Option<f64>,
}

pub fn prepare(cfg: &AuditConfig) -> Result<PreparedAudit> {
    let (dataset, spec) = load_csv(&cfg.data.path, &cfg.csv_schema())?;
    prepare_with(cfg, dataset, spec)
}

/// Same as [`prepare`] but on an already-loaded dataset (used by tests and
/// the bindings).
pub fn prepare_with(cfg: &AuditConfig, dataset: Dataset, spec: ProtectedSpec) -> Result<PreparedAudit> {
    spec.validate(&dataset)?;
    let resolved = resolve_targets(cfg, &dataset)?;
    let hp = cfg.mimic.hyperparams();
    match cfg.mode {
        Mode::Whitebox => {
            let model = crate::model::train_gbdt(
                &dataset,
                &resolved.targets,
                resolved.objective,
                &hp,
                cfg.seed,
            )?;
            Ok(PreparedAudit {
                dataset,
                spec,
                model,
                targets: resolved.targets,
                objective: Objective::Logistic,
                fidelity_r2: None,
                agreement: None,
            })
        }
        Mode::BlackboxColumn | Mode::BlackboxSubprocess => {
            let distilled = distill_on_targets(&dataset, resolved.targets, &hp, cfg.seed)?;
            Ok(PreparedAudit {
                dataset,
                spec,
                model: distilled.model,
                targets: distilled.targets,
                objective: distilled.objective,
                fidelity_r2: Some(distilled.fidelity_r2),
                agreement: Some(distilled.agreement),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub objective: Objective,
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub fidelity_r2: Option<f64>,
    pub agreement: Option<f64>,
    pub auc_in_sample: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapInfo {
    pub phi0: f64,
    pub background_rows: usize,
    pub additivity_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceCount {
    pub group: String,
    pub outcome: u8,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeMetric {
    /// `None` when the criterion pools every outcome.
    pub outcome: Option<u8>,
    pub metric: f64,
    pub baseline: BaselineStats,
    pub ratio: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub distance_kind: String,
    pub outcomes: Vec<OutcomeMetric>,
}

impl CriterionReport {
    pub fn violated(&self) -> bool {
        self.outcomes.iter().any(|o| o.verdict == Verdict::Violation)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub meta: Meta,
    pub model: ModelInfo,
    pub shap: ShapInfo,
    pub slices: Vec<SliceCount>,
    pub criteria: Vec<CriterionReport>,
    pub violation: bool,
}

pub struct AuditOutcome {
    pub violation: bool,
    pub report: AuditReport,
    pub written: Vec<PathBuf>,
}

/// Run the full detection pipeline: train/distill, attribute, score the
/// three criteria, compare against the randomized baseline, and write the
/// report plus plot data.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditOutcome> {
    let prepared = prepare(cfg)?;
    run_audit_prepared(cfg, &prepared)
}

pub fn run_audit_prepared(cfg: &AuditConfig, prepared: &PreparedAudit) -> Result<AuditOutcome> {
    let d = &prepared.dataset;
    let spec = &prepared.spec;
    let meta = Meta::new(cfg);
    let protected_col = spec.validate(d)?;

    let vf = ValueFunctionConfig::new(d, cfg.shap.background_cap, cfg.shap.seed)?;
    let shap = tree_shap(&prepared.model, d.rows_view(), &vf)?;
    let kind = cfg.detect.distance_kind();

    let dp = demographic_parity_score(&shap, d, spec)?;
    let eopp = equality_of_opportunity_score(&shap, d, spec, kind)?;
    let eodds = equalized_odds_score(&shap, d, spec, kind)?;

    let baselines = randomized_baseline(
        d,
        spec,
        &BaselinePipeline {
            targets: &prepared.targets,
            objective: prepared.objective,
            hyperparams: cfg.mimic.hyperparams(),
            background_cap: cfg.shap.background_cap,
            shap_seed: cfg.shap.seed,
            distance: kind,
        },
        cfg.detect.k_permutations,
        cfg.seed,
    )?;

    let thr = cfg.detect.ratio_threshold;
    let floor = cfg.detect.floor;
    let entry = |outcome: Option<u8>, metric: f64, stats: &BaselineStats| OutcomeMetric {
        outcome,
        metric,
        baseline: stats.clone(),
        ratio: baseline_ratio(metric, stats, floor),
        verdict: verdict(metric, stats, thr, floor),
    };
    let criteria = vec![
        CriterionReport {
            criterion: "demographic_parity".into(),
            distance_kind: "mean_abs_shap".into(),
            outcomes: vec![entry(None, dp, &baselines.demographic_parity)],
        },
        CriterionReport {
            criterion: "equality_of_opportunity".into(),
            distance_kind: kind.name().into(),
            outcomes: vec![entry(
                Some(spec.favorable_outcome),
                eopp,
                &baselines.equality_of_opportunity,
            )],
        },
        CriterionReport {
            criterion: "equalized_odds".into(),
            distance_kind: kind.name().into(),
            outcomes: vec![
                entry(Some(0), eodds.y0, &baselines.equalized_odds_y0),
                entry(Some(1), eodds.y1, &baselines.equalized_odds_y1),
            ],
        },
    ];
    let violation = criteria.iter().any(CriterionReport::violated);

    let scores = prepared.model.predict_scores(d)?;
    let report = AuditReport {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        meta: meta.clone(),
        model: ModelInfo {
            objective: prepared.objective,
            n_trees: cfg.mimic.n_trees,
            max_depth: cfg.mimic.max_depth,
            learning_rate: cfg.mimic.learning_rate,
            fidelity_r2: prepared.fidelity_r2,
            agreement: prepared.agreement,
            auc_in_sample: auc(&scores, &d.label).ok(),
        },
        shap: ShapInfo {
            phi0: shap.phi0,
            background_rows: vf.n_rows(),
            additivity_residual: additivity_check(&shap),
        },
        slices: slice_counts(d, spec, protected_col),
        criteria,
        violation,
    };

    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let mut written = Vec::new();
    written.push(write_json(&out.join("report.json"), &report)?);
    written.push({
        let path = out.join("shap_values.csv");
        write_shap_csv(&shap, &d.column_names, &path, Some(&meta.csv_comment()))?;
        path
    });
    written.push(write_json(
        &out.join("shap_summary.json"),
        &WithMeta {
            schema_version: ARTIFACT_SCHEMA_VERSION,
            meta: &meta,
            body: summarize(&shap, &d.column_names),
        },
    )?);
    written.push(write_json(
        &out.join("encoders.json"),
        &WithMeta {
            schema_version: ARTIFACT_SCHEMA_VERSION,
            meta: &meta,
            body: &d.encoders,
        },
    )?);
    written.push({
        let path = out.join("mimic_model.json");
        prepared.model.save(&path)?;
        path
    });
    written.extend(write_histograms(out, &meta, d, spec, protected_col, &shap, &baselines)?);

    Ok(AuditOutcome {
        violation,
        report,
        written,
    })
}

#[derive(Serialize)]
struct WithMeta<'a, T: Serialize> {
    schema_version: u32,
    meta: &'a Meta,
    #[serde(flatten)]
    body: T,
}

fn slice_counts(d: &Dataset, spec: &ProtectedSpec, col: usize) -> Vec<SliceCount> {
    let mut out = Vec::new();
    for &g in &spec.groups {
        for outcome in [0u8, 1u8] {
            let count = (0..d.n_rows)
                .filter(|&i| d.row(i)[col] == g && d.label[i] == outcome)
                .count();
            out.push(SliceCount {
                group: d.decode(&spec.column, g),
                outcome,
                count,
            });
        }
    }
    out
}

/// Long-format histogram CSV over shared equal-width bins.
fn histogram_csv(meta: &Meta, series: &[(String, Vec<f64>)]) -> String {
    let mut out = format!("# {}\n", meta.csv_comment());
    out.push_str("bin_lo,bin_hi,series,count\n");
    let all: Vec<f64> = series.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    if all.is_empty() {
        return out;
    }
    let lo = all.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = all.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let width = if hi > lo { (hi - lo) / HIST_BINS as f64 } else { 1.0 };
    let n_bins = if hi > lo { HIST_BINS } else { 1 };
    for (name, values) in series {
        let mut counts = vec![0usize; n_bins];
        for &v in values {
            let b = (((v - lo) / width) as usize).min(n_bins - 1);
            counts[b] += 1;
        }
        for (b, &c) in counts.iter().enumerate() {
            let bin_lo = lo + b as f64 * width;
            let bin_hi = lo + (b + 1) as f64 * width;
            out.push_str(&format!("{bin_lo},{bin_hi},{name},{c}\n"));
        }
    }
    out
}

fn write_histograms(
    out_dir: &Path,
    meta: &Meta,
    d: &Dataset,
    spec: &ProtectedSpec,
    col: usize,
    shap: &ShapMatrix,
    baselines: &CriterionBaselines,
) -> Result<Vec<PathBuf>> {
    let phi_a = shap.feature_column(col);
    let mut written = Vec::new();

    // Observed vs first-permutation attribution distribution (parity view).
    let parity = histogram_csv(
        meta,
        &[
            ("protected".to_string(), phi_a.clone()),
            ("randomized".to_string(), baselines.sample_phi_a.clone()),
        ],
    );
    written.push(write_text(&out_dir.join("hist_parity.csv"), &parity)?);

    // Group-conditional distributions per true outcome (opportunity/odds views).
    for outcome in [1u8, 0u8] {
        let series: Vec<(String, Vec<f64>)> = spec
            .groups
            .iter()
            .map(|&g| {
                let values: Vec<f64> = (0..d.n_rows)
                    .filter(|&i| d.row(i)[col] == g && d.label[i] == outcome)
                    .map(|i| phi_a[i])
                    .collect();
                (d.decode(&spec.column, g), values)
            })
            .collect();
        let csv = histogram_csv(meta, &series);
        written.push(write_text(&out_dir.join(format!("hist_y{outcome}.csv")), &csv)?);
    }
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub schema_version: u32,
    pub meta: Meta,
    pub criterion: String,
    pub distance_kind: String,
    pub k_permutations: usize,
    pub baseline: BaselineStats,
}

pub struct BaselineOutcome {
    pub written: Vec<PathBuf>,
}

/// Compute and persist the randomized baseline alone, one file per criterion.
pub fn run_baseline(cfg: &AuditConfig) -> Result<BaselineOutcome> {
    let (d, spec) = load_csv(&cfg.data.path, &cfg.csv_schema())?;
    let resolved = resolve_targets(cfg, &d)?;
    let kind = cfg.detect.distance_kind();
    let baselines = randomized_baseline(
        &d,
        &spec,
        &BaselinePipeline {
            targets: &resolved.targets,
            objective: resolved.objective,
            hyperparams: cfg.mimic.hyperparams(),
            background_cap: cfg.shap.background_cap,
            shap_seed: cfg.shap.seed,
            distance: kind,
        },
        cfg.detect.k_permutations,
        cfg.seed,
    )?;

    let meta = Meta::new(cfg);
    ensure_dir(&cfg.output_dir)?;
    let mut written = Vec::new();
    let entries = [
        ("demographic_parity", "mean_abs_shap", &baselines.demographic_parity),
        ("equality_of_opportunity", kind.name(), &baselines.equality_of_opportunity),
        ("equalized_odds_y0", kind.name(), &baselines.equalized_odds_y0),
        ("equalized_odds_y1", kind.name(), &baselines.equalized_odds_y1),
    ];
    for (criterion, distance, stats) in entries {
        let report = BaselineReport {
            schema_version: ARTIFACT_SCHEMA_VERSION,
            meta: meta.clone(),
            criterion: criterion.to_string(),
            distance_kind: distance.to_string(),
            k_permutations: cfg.detect.k_permutations,
            baseline: stats.clone(),
        };
        written.push(write_json(
            &cfg.output_dir.join(format!("baseline_{criterion}.json")),
            &report,
        )?);
    }
    Ok(BaselineOutcome { written })
}

#[derive(Debug, Clone, Serialize)]
pub struct MitigationFile<'a> {
    pub schema_version: u32,
    pub meta: &'a Meta,
    pub group_names: Vec<String>,
    pub calibration_warnings: &'a [String],
    #[serde(flatten)]
    pub result: &'a MitigationResult,
}

pub struct MitigateOutcome {
    pub plan_alpha: f64,
    pub modified_group: String,
    /// Encoded group values paired with their display names.
    pub group_labels: Vec<(f64, String)>,
    pub random: MitigationResult,
    pub quadrant: MitigationResult,
    pub table: MitigationTable,
    pub calibration_warnings: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// Run both mitigation variants (random and quadrant selection) with the
/// same mixing rate and emit results, the comparison table, and scatter
/// plot data.
pub fn run_mitigate(cfg: &AuditConfig) -> Result<MitigateOutcome> {
    let prepared = prepare(cfg)?;
    run_mitigate_prepared(cfg, &prepared)
}

pub fn run_mitigate_prepared(cfg: &AuditConfig, prepared: &PreparedAudit) -> Result<MitigateOutcome> {
    let d = &prepared.dataset;
    let spec = &prepared.spec;
    if spec.groups.len() != 2 {
        return Err(Error::Validation(
            "mitigation requires a binary protected attribute".into(),
        ));
    }
    let col = spec.validate(d)?;
    let cost = cfg.mitigate.cost_spec();
    let meta = Meta::new(cfg);

    let scores = prepared.model.predict_scores(d)?;

    // The calibration assumption is checked, not enforced.
    let mut calibration_warnings = Vec::new();
    if let Ok(table) = calibration_table(&scores, &d.label, 10) {
        for bin in table.iter().filter(|b| b.count > 0 && b.gap() > 0.1) {
            calibration_warnings.push(format!(
                "calibration gap {:.3} in score bin [{:.1}, {:.1}) ({} rows)",
                bin.gap(),
                bin.lo,
                bin.hi,
                bin.count
            ));
        }
    }

    let protected = d.feature_column(col);
    let (ga, gb) = (spec.groups[0], spec.groups[1]);
    let before = [
        group_stats(&scores, &d.label, &protected, ga)?,
        group_stats(&scores, &d.label, &protected, gb)?,
    ];
    let plan = plan_mitigation(&before[0], &before[1], &cost)?;
    let modified_stats = if before[0].group == plan.modified_group { &before[0] } else { &before[1] };
    let mu_t = modified_stats.base_rate;
    let group_rows: Vec<usize> = (0..d.n_rows).filter(|&i| protected[i] == plan.modified_group).collect();

    // Attributions of the protected column, needed for quadrant selection.
    let vf = ValueFunctionConfig::new(d, cfg.shap.background_cap, cfg.shap.seed)?;
    let shap = tree_shap(&prepared.model, d.rows_view(), &vf)?;
    let phi_a = shap.feature_column(col);
    let raw: Vec<f64> = (0..d.n_rows).map(|i| prepared.model.predict_raw(d.row(i))).collect();
    let points = build_points(
        &group_rows,
        &phi_a,
        &raw,
        &scores,
        mu_t,
        cfg.mitigate.distance,
        prepared.objective,
    );

    let d_random = random_select(&group_rows, plan.alpha, cfg.mitigate.seed);
    let d_quadrant = find_individuals(&points, plan.alpha);

    let make_result = |method: SelectionMethod, d_u: &[usize]| -> Result<MitigationResult> {
        let new_scores = apply_mitigation(&scores, d_u, mu_t, &group_rows)?;
        let after = [
            group_stats(&new_scores, &d.label, &protected, ga)?,
            group_stats(&new_scores, &d.label, &protected, gb)?,
        ];
        Ok(MitigationResult {
            method,
            alpha: plan.alpha,
            target_cost: plan.target_cost,
            modified_group: plan.modified_group,
            modified_indices: d_u.to_vec(),
            new_scores,
            cost_gap_before: (before[0].weighted_cost(&cost) - before[1].weighted_cost(&cost)).abs(),
            cost_gap_after: (after[0].weighted_cost(&cost) - after[1].weighted_cost(&cost)).abs(),
            per_group_stats_before: before,
            per_group_stats_after: after,
        })
    };
    let random = make_result(SelectionMethod::Random, &d_random)?;
    let quadrant = make_result(SelectionMethod::Quadrant, &d_quadrant)?;
    let table = mitigation_report(
        &before,
        &random.per_group_stats_after,
        &quadrant.per_group_stats_after,
        &cost,
    );

    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let group_names: Vec<String> = spec.groups.iter().map(|&g| d.decode(&spec.column, g)).collect();
    let mut written = Vec::new();
    for (name, result) in [("random", &random), ("quadrant", &quadrant)] {
        written.push(write_json(
            &out.join(format!("mitigation_{name}.json")),
            &MitigationFile {
                schema_version: ARTIFACT_SCHEMA_VERSION,
                meta: &meta,
                group_names: group_names.clone(),
                calibration_warnings: &calibration_warnings,
                result,
            },
        )?);
    }
    written.push(write_json(
        &out.join("mitigation_comparison.json"),
        &WithMeta {
            schema_version: ARTIFACT_SCHEMA_VERSION,
            meta: &meta,
            body: &table,
        },
    )?);
    written.push(write_text(
        &out.join("mitigation_scatter.csv"),
        &scatter_csv(&meta, &points, &d_random, &d_quadrant),
    )?);

    Ok(MitigateOutcome {
        plan_alpha: plan.alpha,
        modified_group: d.decode(&spec.column, plan.modified_group),
        group_labels: spec
            .groups
            .iter()
            .map(|&g| (g, d.decode(&spec.column, g)))
            .collect(),
        random,
        quadrant,
        table,
        calibration_warnings,
        written,
    })
}

fn scatter_csv(meta: &Meta, points: &[QuadrantPoint], d_random: &[usize], d_quadrant: &[usize]) -> String {
    let mut out = format!("# {}\n", meta.csv_comment());
    out.push_str("row_id,shap,pred,quadrant,selected_random,selected_quadrant\n");
    for p in points {
        let sr = u8::from(d_random.binary_search(&p.row).is_ok());
        let sq = u8::from(d_quadrant.binary_search(&p.row).is_ok());
        out.push_str(&format!(
            "{},{},{},{},{sr},{sq}\n",
            p.row, p.shap, p.pred, p.quadrant
        ));
    }
    out
}

/// Render the comparison table for terminal output.
pub fn format_mitigation_table(table: &MitigationTable, group_labels: &[(f64, String)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:<22} {:>10} {:>10} {:>10}\n",
        "metric", "group", "before", "random", "quadrant"
    ));
    for row in &table.rows {
        let name = group_labels
            .iter()
            .find(|(g, _)| *g == row.group)
            .map(|(_, n)| n.clone())
            .unwrap_or_else(|| format!("{}", row.group));
        out.push_str(&format!(
            "{:<12} {:<22} {:>10.4} {:>10.4} {:>10.4}\n",
            row.metric, name, row.before, row.random, row.quadrant
        ));
    }
    out.push_str(&format!(
        "weighted-cost gap: before {:.4}, random {:.4}, quadrant {:.4}\n",
        table.cost_gap_before, table.cost_gap_random, table.cost_gap_quadrant
    ));
    out
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

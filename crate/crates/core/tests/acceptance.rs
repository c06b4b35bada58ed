//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).

mod common;

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairshap_core::data::Dataset;
use fairshap_core::detect::wasserstein1;
use fairshap_core::mitigate::{find_individuals, QuadrantPoint};
use fairshap_core::model::{train_gbdt, Hyperparams, Objective};
use fairshap_core::pipeline::{prepare, run_audit, run_audit_prepared, run_mitigate_prepared};
use fairshap_core::shap::{
    additivity_check, exact_shapley, tree_shap, FnModel, RowsView, ValueFunctionConfig,
};
use fairshap_core::synth::SynthConfig;

fn criterion<F: FnOnce()>(id: &str, body: F) {
    let result = catch_unwind(AssertUnwindSafe(body));
    match &result {
        Ok(()) => println!("ACCEPTANCE {id}: PASS"),
        Err(_) => println!("ACCEPTANCE {id}: FAIL"),
    }
    if let Err(e) = result {
        resume_unwind(e);
    }
}

// ---------------------------------------------------------------------------
// 1. tree_shap equals exact coalition enumeration on random ensembles.

#[test]
fn c1_tree_shap_matches_exact_enumeration() {
    criterion("C1 shap-exactness", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
        for model_idx in 0..50 {
            let m: usize = rng.random_range(2..=12);
            let depth = rng.random_range(1..=4);
            let mut n_trees = rng.random_range(3..=30);
            if m >= 9 {
                n_trees = n_trees.min(10); // keep the 2^M reference affordable
            }
            let n_train = 60;
            let rows: Vec<Vec<f64>> = (0..n_train)
                .map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let labels: Vec<u8> = (0..n_train).map(|_| rng.random_range(0..2u8)).collect();
            let cols = (0..m).map(|j| format!("f{j}")).collect();
            let d = Dataset::from_parts(cols, rows, labels.clone(), None).unwrap();
            let targets: Vec<f64> = (0..n_train)
                .map(|i| d.row(i)[0] * 0.8 + d.row(i)[m - 1].sin() + labels[i] as f64)
                .collect();
            let objective = if model_idx % 2 == 0 { Objective::Squared } else { Objective::Logistic };
            let targets: Vec<f64> = if objective == Objective::Logistic {
                targets.iter().map(|t| (t.rem_euclid(1.0)).clamp(0.0, 1.0)).collect()
            } else {
                targets
            };
            let hp = Hyperparams {
                n_trees,
                max_depth: depth,
                learning_rate: 0.3,
                min_child_rows: 2,
            };
            let model = train_gbdt(&d, &targets, objective, &hp, 0).unwrap();

            let bg_rows = rng.random_range(2..=5usize).min(if m >= 10 { 3 } else { 5 });
            let bg: Vec<f64> = (0..bg_rows)
                .flat_map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<_>>())
                .collect();
            let vf = ValueFunctionConfig::from_matrix(&bg, m, bg_rows, 0).unwrap();

            let explain: Vec<f64> = (0..100 * m).map(|_| rng.random_range(-2.5..2.5)).collect();
            let view = RowsView::new(&explain, m);
            let fast = tree_shap(&model, view, &vf).unwrap();
            let slow = exact_shapley(&model, view, &vf).unwrap();

            for i in 0..view.n_rows() {
                for j in 0..m {
                    let diff = (fast.phi(i, j) - slow.phi(i, j)).abs();
                    assert!(
                        diff <= 1e-8,
                        "model {model_idx} (m={m}, trees={n_trees}, depth={depth}) row {i} feature {j}: diff {diff:e}"
                    );
                }
            }
            assert!(additivity_check(&fast) <= 1e-9, "tree additivity, model {model_idx}");
            assert!(additivity_check(&slow) <= 1e-9, "exact additivity, model {model_idx}");
        }
    });
}

// ---------------------------------------------------------------------------
// 2. Linear models: phi_i = w_i (x_i - mu_i) in closed form.

#[test]
fn c2_linear_closed_form() {
    criterion("C2 linear-closed-form", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
        for m in [2usize, 3, 5] {
            let w: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let intercept = rng.random_range(-1.0..1.0);
            let w_model = w.clone();
            let model = FnModel(move |row: &[f64]| {
                intercept + row.iter().zip(&w_model).map(|(x, wi)| x * wi).sum::<f64>()
            });
            let n_bg = 12;
            let bg: Vec<f64> = (0..n_bg * m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mu: Vec<f64> = (0..m)
                .map(|j| (0..n_bg).map(|i| bg[i * m + j]).sum::<f64>() / n_bg as f64)
                .collect();
            let vf = ValueFunctionConfig::from_matrix(&bg, m, n_bg, 0).unwrap();
            let explain: Vec<f64> = (0..10 * m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let view = RowsView::new(&explain, m);
            let s = exact_shapley(&model, view, &vf).unwrap();
            for i in 0..view.n_rows() {
                for j in 0..m {
                    let expected = w[j] * (view.row(i)[j] - mu[j]);
                    assert!(
                        (s.phi(i, j) - expected).abs() <= 1e-9,
                        "m={m} row={i} feature={j}"
                    );
                }
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 3. wasserstein1 equals brute-force minimum-cost matching (Hungarian oracle,
//    itself checked against full permutation enumeration on tiny inputs).

/// O(n^3) Hungarian assignment on a square cost matrix; returns the minimum
/// total cost. Independent of the sorted-CDF implementation under test.
fn hungarian_min_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched = vec![0usize; n + 1]; // matched[j] = row assigned to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[matched[j] - 1][j - 1]).sum()
}

fn permutation_min_cost(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..cost.len() {
            if !used[j] {
                used[j] = true;
                go(cost, row + 1, used, acc + cost[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
    best
}

fn abs_cost_matrix(u: &[f64], v: &[f64]) -> Vec<Vec<f64>> {
    u.iter()
        .map(|&a| v.iter().map(|&b| (a - b).abs()).collect())
        .collect()
}

#[test]
fn c3_wasserstein_equals_min_cost_matching() {
    criterion("C3 wasserstein-oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC3);

        // Bootstrap trust in the Hungarian oracle itself.
        for _ in 0..30 {
            let n = rng.random_range(1..=6usize);
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let cost = abs_cost_matrix(&u, &v);
            assert!((hungarian_min_cost(&cost) - permutation_min_cost(&cost)).abs() < 1e-10);
        }

        for pair in 0..200 {
            let n = rng.random_range(1..=200usize);
            let quantize = pair % 2 == 0; // force ties on half the pairs
            let draw = |rng: &mut ChaCha8Rng| {
                let x: f64 = rng.random_range(-5.0..5.0);
                if quantize { (x * 4.0).round() / 4.0 } else { x }
            };
            let u: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
            let v: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
            let expected = hungarian_min_cost(&abs_cost_matrix(&u, &v)) / n as f64;
            let got = wasserstein1(&u, &v).unwrap();
            assert!(
                (got - expected).abs() <= 1e-9,
                "pair {pair} (n={n}): {got} vs {expected}"
            );
        }
    });
}

// ---------------------------------------------------------------------------
// 4. Planted bias is detected at >= 5x baseline; the null case stays <= 2x.

fn audit_ratios(bias_bonus: f64, seed: u64) -> (f64, f64, f64, f64, bool) {
    let dir = tempfile::tempdir().unwrap();
    let csv = common::synth_csv(
        dir.path(),
        "synth.csv",
        &SynthConfig {
            n_rows: 5000,
            n_features: 6,
            bias_bonus,
            group_fraction: 0.5,
            seed,
        },
    );
    let cfg = common::synth_audit_config(&csv, &dir.path().join("out"));
    let outcome = run_audit(&cfg).unwrap();
    let r = &outcome.report;
    let ratio_of = |name: &str| {
        r.criteria
            .iter()
            .find(|c| c.criterion == name)
            .unwrap()
            .outcomes
            .iter()
            .map(|o| o.ratio)
            .collect::<Vec<_>>()
    };
    let dp = ratio_of("demographic_parity")[0];
    let eopp = ratio_of("equality_of_opportunity")[0];
    let eodds = ratio_of("equalized_odds");
    (dp, eopp, eodds[0], eodds[1], outcome.violation)
}

#[test]
fn c4_planted_bias_detection() {
    criterion("C4 planted-bias-detection", || {
        let (dp, eopp, eo0, eo1, violation) = audit_ratios(0.15, 101);
        println!("biased ratios: dp {dp:.2}, eopp {eopp:.2}, eodds ({eo0:.2}, {eo1:.2})");
        assert!(dp >= 5.0, "biased demographic-parity ratio {dp}");
        assert!(eopp >= 5.0, "biased equality-of-opportunity ratio {eopp}");
        assert!(eo0 >= 5.0, "biased equalized-odds Y=0 ratio {eo0}");
        assert!(eo1 >= 5.0, "biased equalized-odds Y=1 ratio {eo1}");
        assert!(violation, "biased run must report a violation");

        let (dp, eopp, eo0, eo1, violation) = audit_ratios(0.0, 101);
        println!("null ratios: dp {dp:.2}, eopp {eopp:.2}, eodds ({eo0:.2}, {eo1:.2})");
        assert!(dp <= 2.0, "null demographic-parity ratio {dp}");
        assert!(eopp <= 2.0, "null equality-of-opportunity ratio {eopp}");
        assert!(eo0 <= 2.0, "null equalized-odds Y=0 ratio {eo0}");
        assert!(eo1 <= 2.0, "null equalized-odds Y=1 ratio {eo1}");
        assert!(!violation, "null run must not report a violation");
    });
}

// ---------------------------------------------------------------------------
// 5. COMPAS directional reproduction, only when the public dataset is
//    supplied via FAIRSHAP_COMPAS_CSV (raw ProPublica two-years file).

#[test]
fn c5_compas_directional() {
    let Some(path) = std::env::var_os("FAIRSHAP_COMPAS_CSV") else {
        println!("ACCEPTANCE C5 compas-directional: SKIP (set FAIRSHAP_COMPAS_CSV to run)");
        return;
    };
    criterion("C5 compas-directional", || {
        let prepared_csv = compas::prepare_csv(std::path::Path::new(&path));
        let dir = tempfile::tempdir().unwrap();

        let mut cfg = common::synth_audit_config(&prepared_csv, &dir.path().join("out"));
        cfg.data.label = "label".into();
        cfg.data.score = None;
        cfg.data.protected = "race".into();
        cfg.data.groups = vec!["Caucasian".into(), "African-American".into()];
        cfg.mode = fairshap_core::pipeline::Mode::Whitebox;
        cfg.mimic = fairshap_core::pipeline::MimicConfig {
            n_trees: 150,
            max_depth: 4,
            learning_rate: 0.1,
            min_child_rows: 20,
        };

        // Holdout AUC of the same model family on the same data.
        let (d, _spec) = fairshap_core::data::load_csv(&prepared_csv, &cfg.csv_schema()).unwrap();
        let (train, test) = fairshap_core::data::split(&d, 0.8, cfg.seed).unwrap();
        let targets: Vec<f64> = train.label.iter().map(|&y| y as f64).collect();
        let model = train_gbdt(&train, &targets, Objective::Logistic, &cfg.mimic.hyperparams(), cfg.seed).unwrap();
        let scores = model.predict_scores(&test).unwrap();
        let auc = fairshap_core::model::auc(&scores, &test.label).unwrap();
        println!("compas holdout auc = {auc:.4}");
        assert!((0.78..=0.88).contains(&auc), "mimic auc {auc} outside [0.78, 0.88]");

        let outcome = run_audit(&cfg).unwrap();
        let eodds = outcome
            .report
            .criteria
            .iter()
            .find(|c| c.criterion == "equalized_odds")
            .unwrap();
        for o in &eodds.outcomes {
            println!(
                "compas equalized-odds Y={:?}: metric {:.4}, baseline {:.4}, ratio {:.2}",
                o.outcome, o.metric, o.baseline.mean, o.ratio
            );
            assert!(o.ratio >= 5.0, "race-vs-randomized ratio {} below 5", o.ratio);
        }
    });
}

mod compas {
    //! Minimal ProPublica-style preprocessing of `compas-scores-two-years.csv`.
    //! Favorable outcome Y=1 means the individual did not recidivate within
    //! two years.

    use std::path::{Path, PathBuf};

    pub fn prepare_csv(raw: &Path) -> PathBuf {
        let mut reader = csv::Reader::from_path(raw).expect("open COMPAS csv");
        let headers = reader.headers().expect("headers").clone();
        let idx = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .unwrap_or_else(|| panic!("COMPAS csv missing column {name}"))
        };
        let cols = [
            "sex",
            "age",
            "race",
            "juv_fel_count",
            "juv_misd_count",
            "juv_other_count",
            "priors_count",
            "c_charge_degree",
        ];
        let col_idx: Vec<usize> = cols.iter().map(|c| idx(c)).collect();
        let days = idx("days_b_screening_arrest");
        let is_recid = idx("is_recid");
        let charge = idx("c_charge_degree");
        let race = idx("race");
        let recid2 = idx("two_year_recid");

        let mut out = String::new();
        out.push_str(&cols.join(","));
        out.push_str(",label\n");
        let mut kept = 0;
        for rec in reader.records() {
            let rec = rec.expect("record");
            let days_val: f64 = match rec.get(days).unwrap_or("").parse() {
                Ok(v) => v,
                Err(_) => continue,
            };
            if !(-30.0..=30.0).contains(&days_val) {
                continue;
            }
            if rec.get(is_recid).unwrap_or("") == "-1" {
                continue;
            }
            if rec.get(charge).unwrap_or("") == "O" {
                continue;
            }
            let race_val = rec.get(race).unwrap_or("");
            if race_val != "Caucasian" && race_val != "African-American" {
                continue;
            }
            let recid: i64 = rec.get(recid2).unwrap_or("").parse().expect("two_year_recid");
            let label = 1 - recid;
            let fields: Vec<String> = col_idx
                .iter()
                .map(|&c| rec.get(c).unwrap_or("").to_string())
                .collect();
            out.push_str(&fields.join(","));
            out.push_str(&format!(",{label}\n"));
            kept += 1;
        }
        println!("compas preprocessing kept {kept} rows");
        assert!(kept > 1000, "unexpectedly small COMPAS sample: {kept}");
        let path = std::env::temp_dir().join("fairshap_compas_prepared.csv");
        std::fs::write(&path, out).expect("write prepared csv");
        path
    }
}

// ---------------------------------------------------------------------------
// 6. Mitigation equalizes the weighted-cost gap with both selection methods,
//    moving the same number of individuals and leaving the other group alone.

#[test]
fn c6_mitigation_group_fairness() {
    criterion("C6 mitigation-group-fairness", || {
        let dir = tempfile::tempdir().unwrap();
        let csv = common::synth_csv(
            dir.path(),
            "synth.csv",
            &SynthConfig {
                n_rows: 5000,
                n_features: 6,
                bias_bonus: 0.6,
                group_fraction: 0.5,
                seed: 606,
            },
        );
        let cfg = common::synth_audit_config(&csv, &dir.path().join("out"));
        let prepared = prepare(&cfg).unwrap();
        let original_scores = prepared.model.predict_scores(&prepared.dataset).unwrap();
        let outcome = run_mitigate_prepared(&cfg, &prepared).unwrap();

        assert_eq!(
            outcome.random.modified_indices.len(),
            outcome.quadrant.modified_indices.len(),
            "|D_u| must match across methods"
        );
        assert!(outcome.plan_alpha > 0.0, "planted bias must require mitigation");
        assert!(
            outcome.table.cost_gap_random <= 0.05,
            "random-variant cost gap {}",
            outcome.table.cost_gap_random
        );
        assert!(
            outcome.table.cost_gap_quadrant <= 0.05,
            "quadrant-variant cost gap {}",
            outcome.table.cost_gap_quadrant
        );

        // Untouched group: scores bit-identical, stats identical.
        let protected = prepared
            .dataset
            .feature_column(prepared.dataset.feature_index("group").unwrap());
        let modified_group = outcome.random.modified_group;
        for result in [&outcome.random, &outcome.quadrant] {
            for i in 0..prepared.dataset.n_rows {
                if protected[i] != modified_group {
                    assert_eq!(
                        result.new_scores[i].to_bits(),
                        original_scores[i].to_bits(),
                        "untouched row {i} changed"
                    );
                }
            }
            let untouched = usize::from(result.per_group_stats_before[0].group == modified_group);
            assert_eq!(
                result.per_group_stats_before[untouched],
                result.per_group_stats_after[untouched],
                "untouched group stats changed"
            );
            // base rates never change: labels are untouched
            for g in 0..2 {
                assert_eq!(
                    result.per_group_stats_before[g].base_rate,
                    result.per_group_stats_after[g].base_rate
                );
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 7. find_individuals equals a brute-force restatement of the selection rule.

fn brute_force_select(points: &[QuadrantPoint], alpha: f64) -> Vec<usize> {
    let n_sel = ((alpha * points.len() as f64).abs().round() as usize).min(points.len());
    let mut primary: Vec<&QuadrantPoint> =
        points.iter().filter(|p| p.quadrant == 1 || p.quadrant == 3).collect();
    let mut secondary: Vec<&QuadrantPoint> =
        points.iter().filter(|p| p.quadrant == 2 || p.quadrant == 4).collect();
    let mut picked = Vec::new();
    while picked.len() < n_sel && !primary.is_empty() {
        let mut best = 0;
        for i in 1..primary.len() {
            let (a, b) = (primary[i], primary[best]);
            if a.distance > b.distance || (a.distance == b.distance && a.row < b.row) {
                best = i;
            }
        }
        picked.push(primary.swap_remove(best).row);
    }
    while picked.len() < n_sel && !secondary.is_empty() {
        let mut best = 0;
        for i in 1..secondary.len() {
            let (a, b) = (secondary[i], secondary[best]);
            if a.distance < b.distance || (a.distance == b.distance && a.row < b.row) {
                best = i;
            }
        }
        picked.push(secondary.swap_remove(best).row);
    }
    picked.sort_unstable();
    picked
}

#[test]
fn c7_selection_rule_brute_force() {
    criterion("C7 selection-brute-force", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
        for instance in 0..1000 {
            let n = rng.random_range(1..=50usize);
            // discrete distances force plenty of ties
            let mut points: Vec<QuadrantPoint> = (0..n)
                .map(|row| QuadrantPoint {
                    row,
                    shap: 0.0,
                    pred: 0.0,
                    quadrant: rng.random_range(1..=4u8),
                    distance: rng.random_range(0..=10u32) as f64 / 10.0,
                })
                .collect();
            // order of the candidate list must not matter
            for i in (1..points.len()).rev() {
                let j = rng.random_range(0..=i);
                points.swap(i, j);
            }
            let alpha = match instance % 4 {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random_range(0.0..=1.0),
            };
            let got = find_individuals(&points, alpha);
            let expected = brute_force_select(&points, alpha);
            assert_eq!(got, expected, "instance {instance} (n={n}, alpha={alpha})");
        }
    });
}

// ---------------------------------------------------------------------------
// 8. The worked two-individual scenario: same prediction, different race
//    contribution; the quadrant method deterministically corrects the one
//    who owes more to race, while random selection may pick either.

#[test]
fn c8_two_individual_scenario() {
    criterion("C8 quadrant-vs-random-choice", || {
        let mu = 0.45;
        let individual_a = 0usize; // race contribution 0.3
        let individual_b = 1usize; // race contribution 0.1
        let points = vec![
            QuadrantPoint { row: individual_a, shap: 0.3, pred: 0.9, quadrant: 1, distance: 0.3 },
            QuadrantPoint { row: individual_b, shap: 0.1, pred: 0.9, quadrant: 1, distance: 0.1 },
        ];
        let _ = mu;
        let picked = find_individuals(&points, 0.5); // N = 1
        assert_eq!(picked, vec![individual_a], "quadrant method must pick the 0.3 individual");

        // An adversarial seed makes the random baseline pick the other one.
        let rows = vec![individual_a, individual_b];
        let adversarial = (0..1000u64)
            .find(|&seed| fairshap_core::mitigate::random_select(&rows, 0.5, seed) == vec![individual_b]);
        assert!(
            adversarial.is_some(),
            "no seed within 1000 made random selection pick individual B"
        );
    });
}

// ---------------------------------------------------------------------------
// 9. Full determinism: identical config -> byte-identical artifacts.

#[test]
fn c9_byte_identical_artifacts() {
    criterion("C9 determinism", || {
        let dir = tempfile::tempdir().unwrap();
        let csv = common::synth_csv(
            dir.path(),
            "synth.csv",
            &SynthConfig {
                n_rows: 600,
                n_features: 5,
                bias_bonus: 0.4,
                group_fraction: 0.5,
                seed: 909,
            },
        );
        let run = |out_name: &str| -> std::collections::BTreeMap<String, Vec<u8>> {
            let out = dir.path().join(out_name);
            let mut cfg = common::synth_audit_config(&csv, &out);
            cfg.mimic.n_trees = 20;
            cfg.detect.k_permutations = 2;
            cfg.shap.background_cap = 50;
            let prepared = prepare(&cfg).unwrap();
            run_audit_prepared(&cfg, &prepared).unwrap();
            run_mitigate_prepared(&cfg, &prepared).unwrap();
            std::fs::read_dir(&out)
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (
                        e.file_name().to_string_lossy().to_string(),
                        std::fs::read(e.path()).unwrap(),
                    )
                })
                .collect()
        };
        let first = run("out_a");
        let second = run("out_b");
        assert_eq!(
            first.keys().collect::<Vec<_>>(),
            second.keys().collect::<Vec<_>>(),
            "artifact sets differ"
        );
        assert!(first.len() >= 12, "expected a full artifact set, got {}", first.len());
        for (name, bytes) in &first {
            assert_eq!(bytes, &second[name], "artifact {name} differs between runs");
        }
    });
}

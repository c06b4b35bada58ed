//! Shared fixtures for integration tests.

use std::path::{Path, PathBuf};

use fairshap_core::data::write_csv;
use fairshap_core::pipeline::{AuditConfig, DataConfig, DetectConfig, MimicConfig, Mode, ShapConfig};
use fairshap_core::synth::{generate, SynthConfig};

/// Write a synthetic benchmark dataset (with score column) to `dir/name`.
pub fn synth_csv(dir: &Path, name: &str, cfg: &SynthConfig) -> PathBuf {
    let (d, _) = generate(cfg);
    let path = dir.join(name);
    write_csv(&d, &path).expect("write synthetic csv");
    path
}

/// Audit config for the synthetic benchmark: black-box score column,
/// test-sized mimic, seeded throughout.
pub fn synth_audit_config(csv: &Path, out: &Path) -> AuditConfig {
    AuditConfig {
        data: DataConfig {
            path: csv.to_path_buf(),
            label: "label".into(),
            score: Some("score".into()),
            protected: "group".into(),
            groups: vec!["0".into(), "1".into()],
            favorable_outcome: 1,
        },
        mode: Mode::BlackboxColumn,
        oracle: None,
        mimic: MimicConfig {
            n_trees: 40,
            max_depth: 3,
            learning_rate: 0.3,
            min_child_rows: 40,
        },
        shap: ShapConfig {
            background_cap: 100,
            seed: 7,
        },
        detect: DetectConfig::default(),
        mitigate: Default::default(),
        seed: 42,
        output_dir: out.to_path_buf(),
    }
}

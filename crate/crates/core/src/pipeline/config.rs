//! Audit configuration: a single JSON or TOML file naming the data, the
//! model access mode, and every seed and threshold the pipeline uses.
//! Seeds are mandatory (fixed defaults, never wall-clock entropy) so reruns
//! are byte-identical.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::CsvSchema;
use crate::detect::DistanceKind;
use crate::error::{Error, Result};
use crate::mitigate::{CostSpec, MitigationDistance};
use crate::model::Hyperparams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub data: DataConfig,
    #[serde(default)]
    pub mode: Mode,
    /// Required for `blackbox_subprocess` mode.
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub mimic: MimicConfig,
    #[serde(default)]
    pub shap: ShapConfig,
    #[serde(default)]
    pub detect: DetectConfig,
    #[serde(default)]
    pub mitigate: MitigateConfig,
    /// Global seed for training and baseline permutations.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    pub label: String,
    #[serde(default)]
    pub score: Option<String>,
    pub protected: String,
    pub groups: Vec<String>,
    #[serde(default = "default_favorable")]
    pub favorable_outcome: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Train the model on the true outcomes.
    #[default]
    Whitebox,
    /// Distill a mimic from a precomputed score column.
    BlackboxColumn,
    /// Distill a mimic from an external scoring command.
    BlackboxSubprocess,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Whitebox => "whitebox",
            Mode::BlackboxColumn => "blackbox_column",
            Mode::BlackboxSubprocess => "blackbox_subprocess",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub command: Vec<String>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MimicConfig {
    #[serde(default = "default_n_trees")]
    pub n_trees: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_min_child_rows")]
    pub min_child_rows: usize,
}

impl Default for MimicConfig {
    fn default() -> Self {
        MimicConfig {
            n_trees: default_n_trees(),
            max_depth: default_max_depth(),
            learning_rate: default_learning_rate(),
            min_child_rows: default_min_child_rows(),
        }
    }
}

impl MimicConfig {
    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            min_child_rows: self.min_child_rows,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapConfig {
    #[serde(default = "default_background_cap")]
    pub background_cap: usize,
    #[serde(default = "default_shap_seed")]
    pub seed: u64,
}

impl Default for ShapConfig {
    fn default() -> Self {
        ShapConfig {
            background_cap: default_background_cap(),
            seed: default_shap_seed(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceName {
    Wasserstein1,
    Kl,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectConfig {
    #[serde(default = "default_distance")]
    pub distance: DistanceName,
    #[serde(default = "default_k_permutations")]
    pub k_permutations: usize,
    #[serde(default = "default_ratio_threshold")]
    pub ratio_threshold: f64,
    /// Absolute floor under the baseline mean in the ratio test.
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default = "default_kl_bins")]
    pub kl_bins: usize,
    #[serde(default)]
    pub kl_epsilon: Option<f64>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            distance: default_distance(),
            k_permutations: default_k_permutations(),
            ratio_threshold: default_ratio_threshold(),
            floor: default_floor(),
            kl_bins: default_kl_bins(),
            kl_epsilon: None,
        }
    }
}

impl DetectConfig {
    pub fn distance_kind(&self) -> DistanceKind {
        match self.distance {
            DistanceName::Wasserstein1 => DistanceKind::Wasserstein1,
            DistanceName::Kl => DistanceKind::Kl {
                n_bins: self.kl_bins,
                epsilon: self.kl_epsilon,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigateConfig {
    #[serde(default = "default_weight")]
    pub w_fp: f64,
    #[serde(default = "default_weight")]
    pub w_fn: f64,
    #[serde(default = "default_mitigation_distance")]
    pub distance: MitigationDistance,
    #[serde(default = "default_mitigate_seed")]
    pub seed: u64,
}

impl Default for MitigateConfig {
    fn default() -> Self {
        MitigateConfig {
            w_fp: 1.0,
            w_fn: 1.0,
            distance: default_mitigation_distance(),
            seed: default_mitigate_seed(),
        }
    }
}

impl MitigateConfig {
    pub fn cost_spec(&self) -> CostSpec {
        CostSpec {
            w_fp: self.w_fp,
            w_fn: self.w_fn,
        }
    }
}

fn default_favorable() -> u8 {
    1
}
fn default_batch_size() -> usize {
    1000
}
fn default_n_trees() -> usize {
    100
}
fn default_max_depth() -> usize {
    4
}
fn default_learning_rate() -> f64 {
    0.1
}
fn default_min_child_rows() -> usize {
    10
}
fn default_background_cap() -> usize {
    256
}
fn default_shap_seed() -> u64 {
    7
}
fn default_distance() -> DistanceName {
    DistanceName::Wasserstein1
}
fn default_k_permutations() -> usize {
    5
}
fn default_ratio_threshold() -> f64 {
    3.0
}
fn default_floor() -> f64 {
    1e-3
}
fn default_kl_bins() -> usize {
    50
}
fn default_weight() -> f64 {
    1.0
}
fn default_mitigation_distance() -> MitigationDistance {
    MitigationDistance::ShapOnly
}
fn default_mitigate_seed() -> u64 {
    99
}
fn default_seed() -> u64 {
    42
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub distance: Option<DistanceName>,
}

impl AuditConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let cfg: AuditConfig = match ext {
            "json" => serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            "toml" => toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            other => {
                return Err(Error::Config(format!(
                    "config must be .json or .toml, got '.{other}'"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(dir) = &ov.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(seed) = ov.seed {
            self.seed = seed;
        }
        if let Some(distance) = ov.distance {
            self.detect.distance = distance;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.groups.len() < 2 {
            return Err(Error::Config("data.groups needs at least two entries".into()));
        }
        if self.data.favorable_outcome > 1 {
            return Err(Error::Config("favorable_outcome must be 0 or 1".into()));
        }
        if self.mode == Mode::BlackboxSubprocess && self.oracle.is_none() {
            return Err(Error::Config(
                "blackbox_subprocess mode requires an [oracle] section".into(),
            ));
        }
        if self.mode == Mode::BlackboxColumn && self.data.score.is_none() {
            return Err(Error::Config(
                "blackbox_column mode requires data.score to name the score column".into(),
            ));
        }
        Ok(())
    }

    pub fn csv_schema(&self) -> CsvSchema {
        CsvSchema {
            label: self.data.label.clone(),
            score: self.data.score.clone(),
            protected: self.data.protected.clone(),
            groups: self.data.groups.clone(),
            favorable_outcome: self.data.favorable_outcome,
        }
    }

    /// Hash of the semantic configuration (output location excluded, so the
    /// same audit written to two directories produces identical artifacts).
    pub fn config_hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.output_dir = PathBuf::from("-");
        let bytes = serde_json::to_vec(&normalized).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}

//! The classifier under audit: a gradient-boosted-tree model trained either
//! directly on outcomes (white-box path) or on a black-box oracle's scores
//! (distillation path).
//!
//! Trees are built from first principles with exact greedy split search so
//! the attribution code has full access to node internals.

mod metrics;
mod oracle;
mod train;

pub use metrics::{auc, calibration_table, r_squared, CalibrationBin};
pub use oracle::{distill, distill_on_targets, BlackBoxOracle, Distillation};
pub use train::train_gbdt;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Log loss on targets in [0, 1]; predictions pass through a sigmoid.
    Logistic,
    /// Mean squared error on real targets; raw score is the prediction.
    Squared,
}

/// One node of a binary regression tree. A row goes left iff
/// `value <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature_index: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Node 0 is the root; children always come after their parent.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature_index] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    /// Well-formedness: children exist, come after their parent (so the
    /// structure is acyclic), and every non-root node has exactly one parent.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Validation("tree has no nodes".into()));
        }
        let mut referenced = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split {
                feature_index,
                threshold,
                left,
                right,
            } = node
            {
                if *feature_index >= n_features {
                    return Err(Error::Validation(format!(
                        "node {i} splits on feature {feature_index} >= {n_features}"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(Error::Validation(format!("node {i} has non-finite threshold")));
                }
                for &child in [left, right] {
                    if child >= self.nodes.len() {
                        return Err(Error::Validation(format!("node {i} references missing child {child}")));
                    }
                    if child <= i {
                        return Err(Error::Validation(format!(
                            "node {i} references child {child} out of preorder"
                        )));
                    }
                    referenced[child] += 1;
                }
            }
        }
        if referenced[0] != 0 || referenced.iter().skip(1).any(|&c| c != 1) {
            return Err(Error::Validation("tree nodes are not a single binary tree".into()));
        }
        Ok(())
    }
}

/// Additive ensemble of regression trees.
///
/// `predict_raw(x) = base_score + learning_rate * sum(tree_k(x))`; the
/// logistic objective maps raw scores through a sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostedModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub objective: Objective,
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
    /// Training loss per boosting round (index 0 = constant model). Not serialized.
    #[serde(skip, default)]
    pub train_loss: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_child_rows: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 100,
            max_depth: 4,
            learning_rate: 0.1,
            min_child_rows: 10,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl GradientBoostedModel {
    pub fn predict_raw(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.eval(row)).sum();
        self.base_score + self.learning_rate * sum
    }

    /// Prediction in the objective's natural output space.
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        match self.objective {
            Objective::Logistic => sigmoid(self.predict_raw(row)),
            Objective::Squared => self.predict_raw(row),
        }
    }

    /// Prediction clamped into [0, 1] for use as a probability.
    pub fn predict_score(&self, row: &[f64]) -> f64 {
        match self.objective {
            Objective::Logistic => sigmoid(self.predict_raw(row)),
            Objective::Squared => self.predict_raw(row).clamp(0.0, 1.0),
        }
    }

    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        self.check_features(d.n_features)?;
        Ok((0..d.n_rows).map(|i| self.predict_one(d.row(i))).collect())
    }

    pub fn predict_scores(&self, d: &Dataset) -> Result<Vec<f64>> {
        self.check_features(d.n_features)?;
        Ok((0..d.n_rows).map(|i| self.predict_score(d.row(i))).collect())
    }

    fn check_features(&self, n: usize) -> Result<()> {
        if n != self.n_features {
            return Err(Error::Validation(format!(
                "feature count mismatch: rows have {n}, model expects {}",
                self.n_features
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct ModelFile<'a> {
            schema_version: u32,
            #[serde(flatten)]
            model: &'a GradientBoostedModel,
        }
        Ok(serde_json::to_string_pretty(&ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            model: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct ModelFile {
            schema_version: u32,
            #[serde(flatten)]
            model: GradientBoostedModel,
        }
        let file: ModelFile = serde_json::from_str(text)?;
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model schema version {}",
                file.schema_version
            )));
        }
        for tree in &file.model.trees {
            tree.validate(file.model.n_features)?;
        }
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump(feature: usize, threshold: f64, left: f64, right: f64) -> DecisionTree {
        DecisionTree {
            nodes: vec![
                Node::Split {
                    feature_index: feature,
                    threshold,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { value: left },
                Node::Leaf { value: right },
            ],
        }
    }

    #[test]
    fn zero_tree_model_predicts_sigmoid_of_base() {
        let m = GradientBoostedModel {
            base_score: 0.7,
            learning_rate: 0.1,
            objective: Objective::Logistic,
            n_features: 3,
            trees: vec![],
            train_loss: vec![],
        };
        let p = m.predict_one(&[1.0, 2.0, 3.0]);
        assert!((p - sigmoid(0.7)).abs() < 1e-15);
    }

    #[test]
    fn single_tree_path_traced_by_hand() {
        // raw = 0.5 * (+1 or -1); tie rule: value <= threshold goes left.
        let m = GradientBoostedModel {
            base_score: 0.0,
            learning_rate: 0.5,
            objective: Objective::Squared,
            n_features: 2,
            trees: vec![stump(1, 2.0, 1.0, -1.0)],
            train_loss: vec![],
        };
        assert_eq!(m.predict_one(&[9.0, 2.0]), 0.5); // 2.0 <= 2.0 goes left
        assert_eq!(m.predict_one(&[9.0, 2.5]), -0.5);
    }

    #[test]
    fn feature_count_mismatch_is_an_error() {
        let m = GradientBoostedModel {
            base_score: 0.0,
            learning_rate: 1.0,
            objective: Objective::Squared,
            n_features: 4,
            trees: vec![],
            train_loss: vec![],
        };
        let d = Dataset::from_parts(vec!["a".into()], vec![vec![1.0]], vec![0], None).unwrap();
        assert!(m.predict(&d).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = GradientBoostedModel {
            base_score: -0.25,
            learning_rate: 0.1,
            objective: Objective::Logistic,
            n_features: 2,
            trees: vec![stump(0, 1.5, 0.3, -0.4)],
            train_loss: vec![0.6],
        };
        let text = m.to_json().unwrap();
        assert!(text.contains("\"schema_version\""));
        let m2 = GradientBoostedModel::from_json(&text).unwrap();
        assert_eq!(m2.trees, m.trees);
        assert_eq!(m2.base_score, m.base_score);
        assert!(m2.train_loss.is_empty()); // loss trace is not persisted
    }

    #[test]
    fn validate_rejects_cyclic_children() {
        let t = DecisionTree {
            nodes: vec![
                Node::Split {
                    feature_index: 0,
                    threshold: 0.0,
                    left: 0,
                    right: 1,
                },
                Node::Leaf { value: 1.0 },
            ],
        };
        assert!(t.validate(1).is_err());
    }
}

//! fairshap: group-fairness auditing and mitigation for tabular classifiers.
//!
//! The library detects discrimination in any black-box scorer by attributing
//! predictions to features with Shapley values, comparing the protected
//! attribute's attribution distributions across groups against a
//! permutation-randomized baseline, and — when a violation is found —
//! post-processing a calibrated classifier so both groups carry the same
//! weighted false-positive/false-negative cost, choosing the individuals to
//! adjust by attribution quadrant rather than at random.
//!
//! Modules:
//! - [`data`]: CSV ingestion, protected-attribute specs, seeded permutation/splits.
//! - [`model`]: gradient-boosted trees (trained directly or distilled from an
//!   oracle), ranking and calibration metrics.
//! - [`shap`]: exact and tree-path Shapley attribution under an interventional
//!   background expectation.
//! - [`detect`]: fairness criteria over attribution distributions, distribution
//!   distances, randomized baselines, verdicts.
//! - [`mitigate`]: base-rate post-processing with quadrant-guided selection.
//! - [`pipeline`]: config-driven end-to-end runs producing JSON/CSV artifacts.
//! - [`synth`]: seeded synthetic benchmark generator with a plantable bias.

pub mod data;
pub mod detect;
pub mod error;
pub mod mitigate;
pub mod model;
pub mod pipeline;
pub mod shap;
pub mod synth;

pub use error::{Error, Result};

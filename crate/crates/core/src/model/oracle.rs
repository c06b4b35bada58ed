//! Black-box scoring oracles and distillation into a transparent mimic.

use std::io::{Read, Write};
use std::process::{Command, Stdio};

use crate::data::Dataset;
use crate::error::{Error, Result};

use super::{r_squared, train_gbdt, GradientBoostedModel, Hyperparams, Objective};

/// Where black-box scores come from.
#[derive(Debug, Clone)]
pub enum BlackBoxOracle {
    /// Scores were precomputed and shipped in the dataset's score column.
    ScoreColumn,
    /// An external command scores row batches: it receives header-less CSV
    /// feature rows on stdin and must print one decimal score per line.
    Subprocess { command: Vec<String>, batch_size: usize },
}

impl BlackBoxOracle {
    /// One score in [0, 1] per row of `d`.
    pub fn query(&self, d: &Dataset) -> Result<Vec<f64>> {
        match self {
            BlackBoxOracle::ScoreColumn => d.score.clone().ok_or_else(|| {
                Error::Schema("score-column oracle requires a score column in the dataset".into())
            }),
            BlackBoxOracle::Subprocess { command, batch_size } => {
                query_subprocess(command, *batch_size, d)
            }
        }
    }
}

fn query_subprocess(command: &[String], batch_size: usize, d: &Dataset) -> Result<Vec<f64>> {
    if command.is_empty() {
        return Err(Error::Config("oracle command is empty".into()));
    }
    let batch_size = batch_size.max(1);
    let mut scores = Vec::with_capacity(d.n_rows);
    let mut start = 0;
    while start < d.n_rows {
        let end = (start + batch_size).min(d.n_rows);
        let mut input = String::new();
        for i in start..end {
            let line: Vec<String> = d.row(i).iter().map(|v| format!("{v}")).collect();
            input.push_str(&line.join(","));
            input.push('\n');
        }
        let batch = run_batch(command, &input).map_err(|message| Error::Oracle {
            start,
            end,
            message,
        })?;
        if batch.len() != end - start {
            return Err(Error::Oracle {
                start,
                end,
                message: format!("expected {} scores, got {}", end - start, batch.len()),
            });
        }
        for (offset, line) in batch.iter().enumerate() {
            let v: f64 = line.trim().parse().map_err(|_| Error::Oracle {
                start,
                end,
                message: format!("malformed score '{line}' for row {}", start + offset),
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Oracle {
                    start,
                    end,
                    message: format!("score {v} for row {} outside [0, 1]", start + offset),
                });
            }
            scores.push(v);
        }
        start = end;
    }
    Ok(scores)
}

fn run_batch(command: &[String], input: &str) -> std::result::Result<Vec<String>, String> {
    let mut child = Command::new(&command[0])
        .args(&command[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| format!("failed to spawn '{}': {e}", command[0]))?;

    let mut stdin = child.stdin.take().expect("stdin piped");
    let input_owned = input.to_string();
    // Writer thread so a child that streams output cannot deadlock us.
    let writer = std::thread::spawn(move || stdin.write_all(input_owned.as_bytes()));

    let mut stdout = String::new();
    child
        .stdout
        .take()
        .expect("stdout piped")
        .read_to_string(&mut stdout)
        .map_err(|e| format!("reading oracle output: {e}"))?;
    let write_result = writer.join().expect("writer thread");
    let status = child.wait().map_err(|e| format!("waiting for oracle: {e}"))?;
    write_result.map_err(|e| format!("writing oracle input: {e}"))?;
    if !status.success() {
        return Err(format!("oracle exited with {status}"));
    }
    Ok(stdout.lines().map(|l| l.to_string()).collect())
}

/// A mimic model plus its fidelity against the oracle it was trained on.
#[derive(Debug, Clone)]
pub struct Distillation {
    pub model: GradientBoostedModel,
    /// The oracle answers the mimic was fitted to.
    pub targets: Vec<f64>,
    pub objective: Objective,
    /// R-squared of mimic predictions against the oracle scores.
    pub fidelity_r2: f64,
    /// Thresholded agreement rate at 0.5.
    pub agreement: f64,
}

/// Query the oracle on every row of `d` and train a student model on the
/// answers: logistic loss when the oracle returns hard 0/1 outputs, squared
/// loss on soft scores.
pub fn distill(
    oracle: &BlackBoxOracle,
    d: &Dataset,
    hp: &Hyperparams,
    seed: u64,
) -> Result<Distillation> {
    let targets = oracle.query(d)?;
    distill_on_targets(d, targets, hp, seed)
}

/// Distillation path for already-fetched oracle answers.
pub fn distill_on_targets(
    d: &Dataset,
    targets: Vec<f64>,
    hp: &Hyperparams,
    seed: u64,
) -> Result<Distillation> {
    let hard = targets.iter().all(|&t| t == 0.0 || t == 1.0);
    let objective = if hard { Objective::Logistic } else { Objective::Squared };
    let model = train_gbdt(d, &targets, objective, hp, seed)?;
    let pred = model.predict_scores(d)?;
    let fidelity_r2 = r_squared(&pred, &targets);
    let n_agree = pred
        .iter()
        .zip(&targets)
        .filter(|(p, t)| (**p >= 0.5) == (**t >= 0.5))
        .count();
    let agreement = n_agree as f64 / d.n_rows as f64;
    Ok(Distillation {
        model,
        targets,
        objective,
        fidelity_r2,
        agreement,
    })
}

//! Command-line fairness auditor: `audit`, `baseline`, `mitigate`, `report`.
//!
//! Exit codes: 0 success, 1 error, 2 (audit only) at least one fairness
//! criterion flagged a violation — so CI pipelines can gate on fairness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fairshap_core::pipeline::{
    format_mitigation_table, run_audit, run_baseline, run_mitigate, AuditConfig, DistanceName,
    Overrides,
};

#[derive(Parser)]
#[command(name = "fairshap", version, about = "Shapley-attribution fairness auditing and mitigation for tabular classifiers")]
struct Cli {
    /// Path to the audit config (.toml or .json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the detection distance.
    #[arg(long, global = true, value_enum)]
    distance: Option<DistanceArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    Wasserstein1,
    Kl,
}

#[derive(Subcommand)]
enum Command {
    /// Detect fairness violations and write the report plus plot data.
    Audit,
    /// Compute only the permutation-randomized baseline statistics.
    Baseline,
    /// Post-process the classifier to equalize group costs (random and
    /// quadrant variants).
    Mitigate,
    /// Pretty-print any JSON artifact.
    Report {
        /// Artifact file to print.
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let payload = serde_json::json!({
                "error": e.to_string(),
                "kind": error_kind(&e),
            });
            eprintln!("{payload}");
            ExitCode::from(1)
        }
    }
}

fn error_kind(e: &fairshap_core::Error) -> &'static str {
    use fairshap_core::Error::*;
    match e {
        Io { .. } => "io",
        Schema(_) => "schema",
        Parse { .. } => "parse",
        Validation(_) => "validation",
        Capability(_) => "capability",
        Oracle { .. } => "oracle",
        Infeasible(_) => "infeasible",
        Config(_) => "config",
        Baseline { .. } => "baseline",
        Json(_) => "json",
    }
}

fn run(cli: Cli) -> fairshap_core::Result<ExitCode> {
    if let Command::Report { file } = &cli.command {
        let text = std::fs::read_to_string(file)
            .map_err(|e| fairshap_core::Error::io(file.clone(), e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        println!("{}", serde_json::to_string_pretty(&value)?);
        return Ok(ExitCode::SUCCESS);
    }

    let config_path = cli.config.ok_or_else(|| {
        fairshap_core::Error::Config("--config is required for this command".into())
    })?;
    let mut cfg = AuditConfig::load(&config_path)?;
    cfg.apply_overrides(&Overrides {
        output_dir: cli.out,
        seed: cli.seed,
        distance: cli.distance.map(|d| match d {
            DistanceArg::Wasserstein1 => DistanceName::Wasserstein1,
            DistanceArg::Kl => DistanceName::Kl,
        }),
    });

    match cli.command {
        Command::Audit => {
            let outcome = run_audit(&cfg)?;
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            for criterion in &outcome.report.criteria {
                for o in &criterion.outcomes {
                    let slice = o
                        .outcome
                        .map_or(String::new(), |y| format!(" [Y={y}]"));
                    println!(
                        "{}{}: metric {:.6}, baseline mean {:.6}, ratio {:.2} -> {:?}",
                        criterion.criterion, slice, o.metric, o.baseline.mean, o.ratio, o.verdict
                    );
                }
            }
            Ok(if outcome.violation {
                println!("verdict: VIOLATION");
                ExitCode::from(2)
            } else {
                println!("verdict: no evidence of violation");
                ExitCode::SUCCESS
            })
        }
        Command::Baseline => {
            let outcome = run_baseline(&cfg)?;
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Mitigate => {
            let outcome = run_mitigate(&cfg)?;
            for warning in &outcome.calibration_warnings {
                eprintln!("warning: {warning}");
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            println!(
                "modified group {} with alpha {:.4} ({} individuals)",
                outcome.modified_group,
                outcome.plan_alpha,
                outcome.quadrant.modified_indices.len()
            );
            print!("{}", format_mitigation_table(&outcome.table, &outcome.group_labels));
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { .. } => unreachable!("handled above"),
    }
}

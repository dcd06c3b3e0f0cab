//! Command-line experiment runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use align_search::harness::{
    compute_metrics, plot_data, replay, run_batch, ExperimentConfig, HarnessError,
};

#[derive(Parser)]
#[command(
    name = "align-search",
    version,
    about = "Seeded object-search experiments"
)]
struct Cli {
    /// Override a config key, e.g. `--set seeds.count=50` or
    /// `--set arms.0.policy=greedy`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every arm over every seed, then compute metrics.
    Run {
        config: PathBuf,
        /// Run only these arms; other arms' traces are kept.
        #[arg(long)]
        only: Vec<String>,
    },
    /// Recompute tables and summary.json from the traces of a batch.
    Metrics { output_dir: PathBuf },
    /// Write plot-ready series from a batch's tables.
    PlotData { output_dir: PathBuf },
    /// Re-run one recorded episode and compare it with the recording.
    Replay { trace: PathBuf },
}

fn batch_config(
    dir: &std::path::Path,
    overrides: &[String],
) -> Result<ExperimentConfig, HarnessError> {
    let mut all = overrides.to_vec();
    all.push(format!("output_dir={:?}", dir.display().to_string()));
    ExperimentConfig::load(&dir.join("config.toml"), &all)
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Run { config, only } => {
            let cfg = ExperimentConfig::load(&config, &cli.overrides)?;
            let report = run_batch(&cfg, &only)?;
            for arm in &report.arms {
                match &arm.failure {
                    None => println!(
                        "{:<16} episodes={:<6} success={:<6} errors={}",
                        arm.arm, arm.episodes, arm.successes, arm.errors
                    ),
                    Some(e) => eprintln!("{:<16} FAILED: {e}", arm.arm),
                }
            }
            for a in &report.metrics.arms {
                println!(
                    "{:<16} SR={:.3} [{:.3}, {:.3}] steps={:.2} dH={:.3}",
                    a.arm,
                    a.summary.success_rate,
                    a.summary.success_ci.0,
                    a.summary.success_ci.1,
                    a.summary.mean_steps,
                    a.dynamics.net_drop
                );
            }
            println!("outputs in {}", report.output_dir.display());
            Ok(if report.failed() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Metrics { output_dir } => {
            let cfg = batch_config(&output_dir, &cli.overrides)?;
            let report = compute_metrics(&cfg)?;
            println!(
                "{} arms written to {}",
                report.arms.len(),
                output_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::PlotData { output_dir } => {
            for path in plot_data(&output_dir)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { trace } => {
            let outcome = replay(&trace)?;
            if outcome.matches() {
                println!(
                    "replay matches: {} steps, success={}",
                    outcome.rerun.steps.len(),
                    outcome.rerun.outcome.success
                );
                Ok(ExitCode::SUCCESS)
            } else {
                match outcome.first_difference() {
                    Some(t) => eprintln!("replay diverges at step {t}"),
                    None => eprintln!("replay differs outside the step list"),
                }
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

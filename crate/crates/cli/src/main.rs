//! Command-line workbench: runs configured experiments and prints machine-
//! readable summaries. Exit codes: 0 success, 1 failed bound checks,
//! 2 configuration/schema errors, 3 exhausted budgets, 4 other errors.

use clap::{Parser, Subcommand};
use poset_lpp::harness::{self, Operation};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "poset-lpp",
    version,
    about = "Crystal-growth / last-passage-percolation workbench on locally finite posets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact passage-time statistics via the backward recursion.
    Oracle(RunArgs),
    /// Monte Carlo simulation of passage times.
    Simulate(RunArgs),
    /// Evaluate every closed-form bound against exact references.
    VerifyBounds(RunArgs),
    /// Shape-function trace over monoid powers.
    Shape(RunArgs),
    /// Path statistics of the target sets.
    Paths(RunArgs),
    /// List supported poset families and their parameters.
    ListPosets,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for emitted artifacts.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also write per-replica samples (simulate only).
    #[arg(long)]
    emit_samples: bool,
    /// Worker threads; falls back to POSET_LPP_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, expected_op) = match &cli.command {
        Command::Oracle(a) => (a, Operation::Oracle),
        Command::Simulate(a) => (a, Operation::Simulate),
        Command::VerifyBounds(a) => (a, Operation::VerifyBounds),
        Command::Shape(a) => (a, Operation::Shape),
        Command::Paths(a) => (a, Operation::Paths),
        Command::ListPosets => {
            println!("{}", harness::list_posets());
            return ExitCode::SUCCESS;
        }
    };

    let threads = args.threads.or_else(|| {
        std::env::var("POSET_LPP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not configure {n} threads: {e}");
        }
    }

    let config_text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };

    // The subcommand must agree with the config's declared operation.
    match harness::ExperimentConfig::from_json(&config_text) {
        Ok(cfg) if cfg.operation != expected_op => {
            eprintln!(
                "error: subcommand '{}' does not match config operation '{}'",
                expected_op.name(),
                cfg.operation.name()
            );
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(u8::try_from(harness::exit_code_for_error(&e)).unwrap_or(4));
        }
        Ok(_) => {}
    }

    match harness::run(&config_text, &args.out_dir, args.emit_samples) {
        Ok(summary) => {
            println!("{}", summary_line(&summary));
            if summary.failures > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(harness::exit_code_for_error(&e)).unwrap_or(4))
        }
    }
}

fn summary_line(summary: &harness::RunSummary) -> String {
    let list: Vec<String> = summary
        .artifacts
        .iter()
        .map(|a| format!("\"{a}\""))
        .collect();
    format!(
        "{{\"operation\":\"{}\",\"checks\":{},\"failures\":{},\"artifacts\":[{}]}}",
        summary.operation,
        summary.checks,
        summary.failures,
        list.join(",")
    )
}

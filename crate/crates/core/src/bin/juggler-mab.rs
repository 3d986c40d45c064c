use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use juggler_mab::cli::{
    cmd_generate, cmd_report, cmd_simulate, cmd_sweep, load_run_config, threads_from_env, CliError,
    Overrides, SimulateOutcome,
};

/// Offline replay of multi-armed bandits that correct a ranking model's
/// utility and compensation weights.
///
/// Configs are JSON. Run config fields (all optional): dataset, output_dir,
/// baseline, seed (0), horizon_days (all days), ndcg ({"cutoff": null,
/// "gain": "exponential"}), arm_space (utility [-0.3, 0, 0.3] x comp
/// [-0.2, 0, 0.2]), update_mode ("per_observation"), policy (baseline),
/// policies (the eleven standard configurations), k (10).
///
/// JUGGLER_MAB_THREADS caps within-day parallelism (0 = automatic).
#[derive(Parser)]
#[command(name = "juggler-mab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with planted best arms
    Generate {
        /// Generator config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Dataset file to write
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay one policy and write its decision log, snapshot and CSVs
    Simulate(RunArgs),
    /// Replay a list of policies sequentially over one dataset
    Sweep(RunArgs),
    /// Compare decision logs against a baseline log
    Report {
        #[command(flatten)]
        run: RunArgs,
        /// Baseline decision log (overrides the config)
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Top-k window for attribute statistics [default: 10]
        #[arg(long)]
        k: Option<usize>,
        /// Decision logs to compare
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Run config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Dataset file (overrides the config)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory, created if absent (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Policy label such as rls_brand, or an algorithm name
    #[arg(long)]
    policy: Option<String>,
}

impl RunArgs {
    fn overrides(&self, k: Option<usize>) -> Overrides {
        Overrides {
            data: self.data.clone(),
            out: self.out.clone(),
            seed: self.seed,
            policy: self.policy.clone(),
            k,
        }
    }
}

fn print_runs(outcome: &SimulateOutcome) {
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    println!("policy\tavg_reward\tavg_regret\tbest_arm_pct");
    for r in &outcome.runs {
        println!(
            "{}\t{:.4}\t{:.4}\t{:.4}",
            r.label, r.summary.avg_reward, r.summary.avg_regret, r.summary.best_arm_pct
        );
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { config, out, seed } => {
            let report = cmd_generate(&config, &out, seed)?;
            println!(
                "wrote {} searches to {} (planted {}, noisy {}, gap {}, neutral ndcg {:.4})",
                report.searches,
                out.display(),
                report.planted_searches,
                report.noisy_searches,
                report
                    .achieved_gap
                    .map(|g| format!("{g:.4}"))
                    .unwrap_or_else(|| "n/a".into()),
                report.neutral_ndcg_mean
            );
        }
        Command::Simulate(args) => {
            let cfg = load_run_config(&args.config, &args.overrides(None))?;
            print_runs(&cmd_simulate(&cfg, threads_from_env()?)?);
        }
        Command::Sweep(args) => {
            let cfg = load_run_config(&args.config, &args.overrides(None))?;
            print_runs(&cmd_sweep(&cfg, threads_from_env()?)?);
        }
        Command::Report {
            run,
            baseline,
            k,
            logs,
        } => {
            let mut cfg = load_run_config(&run.config, &run.overrides(k))?;
            if baseline.is_some() {
                cfg.baseline = baseline;
            }
            let outcome = cmd_report(&cfg, &logs)?;
            println!("run\treward\tregret\tbest_arm");
            for (name, d) in &outcome.comparisons {
                println!(
                    "{name}\t{}\t{}\t{}",
                    d.reward.relative_pct(),
                    d.regret.relative_pct(),
                    d.best_arm_pct.relative_pct()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

//! `rtepinn`: solve forward and inverse radiative-transfer problems with
//! physics-informed neural networks.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

mod artifacts;
mod commands;
mod config;
mod svg;

use clap::{Args, Parser, Subcommand};
use commands::ConfigStage;
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rtepinn", version, about = "Radiative transfer with physics-informed neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-path overrides, e.g. `--set sampling.n_interior=4096`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for `--set out_dir=DIR`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validate and echo the resolved configuration without training.
    #[arg(long)]
    dry_run: bool,
    /// Worker threads for parallel loss assembly and ensemble members
    /// (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Train a forward problem and emit artifacts.
    Solve(CommonArgs),
    /// Reconstruct the absorption coefficient from measured data.
    Invert(CommonArgs),
    /// Grid search with retrainings; emits a leaderboard.
    Ensemble(CommonArgs),
    /// Run the closed-form oracle and invariant regression checks.
    Oracles,
    /// Evaluate the generalization bounds from configured inputs.
    Bound {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn resolve_config(args: &CommonArgs) -> anyhow::Result<RunConfig> {
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(out) = &args.out {
        overrides.push(format!("out_dir={}", out.display()));
    }
    RunConfig::load(args.config.as_deref(), &overrides)
        .map_err(|e| anyhow::Error::new(ConfigStage(format!("{e:#}"))))
}

fn set_jobs(jobs: usize) {
    if jobs > 0 {
        // Ignore failure: the global pool may already exist (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(args) => {
            set_jobs(args.jobs);
            let config = resolve_config(&args)?;
            commands::run_forward(&config, args.dry_run)
        }
        Command::Invert(args) => {
            set_jobs(args.jobs);
            let config = resolve_config(&args)?;
            commands::run_inverse(&config, args.dry_run)
        }
        Command::Ensemble(args) => {
            set_jobs(args.jobs);
            let config = resolve_config(&args)?;
            commands::run_ensemble(&config, args.dry_run)
        }
        Command::Oracles => commands::run_oracles(),
        Command::Bound { config, set } => {
            let config = RunConfig::load(config.as_deref(), &set)
                .map_err(|e| anyhow::Error::new(ConfigStage(format!("{e:#}"))))?;
            commands::run_bound(&config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let is_config = err.downcast_ref::<ConfigStage>().is_some();
            eprintln!("{}", artifacts::error_record(
                if is_config { "config" } else { "runtime" },
                &format!("{err:#}"),
            ));
            if is_config {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

//! `pcone`: batch driver for probabilistic cone metric experiments.
//!
//! Exit status: 0 on success, 1 when a computation fails (for example a
//! diverging iteration), 2 when the configuration is invalid.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::ConfigError;
use crate::report::{OutputDir, Report, TOOL, VERSION};

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "pcone", version, about = "Probabilistic cone metric experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Root seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    /// Output directory for report.json and CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the probabilistic metric axioms on sampled points.
    Axioms {
        #[arg(long)]
        config: PathBuf,
    },
    /// Test a mapping against the contraction conditions.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Picard iteration with bound checks and a uniqueness probe.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve a random Volterra integral equation path by path.
    Sie {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in reproduction suite.
    Demo,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Axioms { .. } => "axioms",
            Command::Classify { .. } => "classify",
            Command::Solve { .. } => "solve",
            Command::Sie { .. } => "sie",
            Command::Demo => "demo",
        }
    }
}

fn seed_for(flag: Option<u64>, config: Option<u64>) -> u64 {
    flag.or(config).unwrap_or(DEFAULT_SEED)
}

fn dispatch(cli: &Cli, out: &OutputDir) -> Result<(u64, Outcome)> {
    match &cli.command {
        Command::Axioms { config } => {
            let cfg: config::AxiomsConfig = config::load(config)?;
            let seed = seed_for(cli.seed, cfg.seed);
            Ok((seed, commands::run_axioms(&cfg, seed)?))
        }
        Command::Classify { config } => {
            let cfg: config::ClassifyConfig = config::load(config)?;
            let seed = seed_for(cli.seed, cfg.seed);
            Ok((seed, commands::run_classify(&cfg, seed)?))
        }
        Command::Solve { config } => {
            let cfg: config::SolveConfig = config::load(config)?;
            let seed = seed_for(cli.seed, cfg.seed);
            Ok((seed, commands::run_solve(&cfg, seed, out)?))
        }
        Command::Sie { config } => {
            let cfg: config::SieConfig = config::load(config)?;
            let seed = seed_for(cli.seed, cfg.seed);
            Ok((seed, commands::run_sie(&cfg, seed, out)?))
        }
        Command::Demo => {
            let seed = seed_for(cli.seed, None);
            Ok((seed, commands::run_demo(seed, out)?))
        }
    }
}

fn run(cli: &Cli) -> Result<PathBuf> {
    let start = Instant::now();
    let out = OutputDir::create(&cli.out)?;
    let (seed, outcome) = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.into())
            .build()
            .context("cannot start worker pool")?
            .install(|| dispatch(cli, &out))?,
        None => dispatch(cli, &out)?,
    };
    let report = Report {
        tool: TOOL,
        version: VERSION,
        command: cli.command.name(),
        config: outcome.config,
        seed,
        results: outcome.results,
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    out.write_report(&report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(path) => {
            println!("report written to {}", path.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

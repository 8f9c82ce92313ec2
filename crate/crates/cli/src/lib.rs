//! Command-line front end: config resolution, CSV artifacts and reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "aloha-bandit", version, about = "Bandit channel selection for ALOHA IoT devices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run learners against i.i.d. Bernoulli channels.
    Bench(RunArgs),
    /// Run the discrete-event ALOHA radio simulation.
    Sim(RunArgs),
    /// Print per-channel Tk/Sk/Xk tables for a trace CSV.
    Report(ReportArgs),
    /// Run the simulation over a grid of loads, alphas and device counts.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML experiment config.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Named scenario: malin4, malin8, malin16, iotligent3.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Master seed; run i uses seed + i.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Number of seeds to run.
    #[arg(long, value_name = "N")]
    pub seeds: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Policies (ucb1, thompson, greedy, uniform), comma separated.
    #[arg(long, value_name = "NAME[,NAME...]", value_delimiter = ',')]
    pub policy: Option<Vec<String>>,
    /// Transmissions per run (per device in `sim`).
    #[arg(long, value_name = "N")]
    pub horizon: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// `sim_trace.csv` or `bench_trace.csv`.
    pub trace: PathBuf,
    /// Number of channels (defaults to the largest channel seen + 1).
    #[arg(long, value_name = "K")]
    pub channels: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Interferer load applied to every channel, one grid value each.
    #[arg(long, value_delimiter = ',')]
    pub loads: Option<Vec<f64>>,
    /// UCB₁ exploration parameters.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Number of identical devices.
    #[arg(long, value_delimiter = ',')]
    pub device_counts: Option<Vec<usize>>,
}

/// Execute a command; the returned text is meant for stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Bench(args) => {
            let file = config::FileConfig::load_opt(args.config.as_deref())?;
            let cfg = config::BenchConfig::resolve(&file, args)?;
            commands::bench::run(&cfg, &args.out)
        }
        Command::Sim(args) => {
            let file = config::FileConfig::load_opt(args.config.as_deref())?;
            let cfg = config::SimConfig::resolve(&file, args)?;
            commands::sim::run(&cfg, &args.out)
        }
        Command::Report(args) => commands::report::run(&args.trace, args.channels),
        Command::Sweep(args) => {
            let file = config::FileConfig::load_opt(args.run.config.as_deref())?;
            let base = config::SimConfig::resolve(&file, &args.run)?;
            let grid = config::SweepGrid::resolve(&file, args.loads.clone(), args.alphas.clone(), args.device_counts.clone())?;
            commands::sweep::run(&base, &grid, &args.run.out)
        }
    }
}

//! `homopolymer` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "homopolymer", version, about = "Spectral, PDE and Monte Carlo experiments for a Brownian polymer in a radial potential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical coupling and spectral summary (spectral.json).
    CriticalBeta(Common),
    /// λ₀ on a grid of couplings above β_cr with a scaling-law fit (scan.csv).
    ScalingScan(Common),
    /// Partition function time series and phase classification (partition.csv).
    Partition(Common),
    /// Weighted path ensemble statistics (ensemble.json).
    Simulate(Common),
    /// Defect suite of the critical transition kernel (defects.json).
    CriticalKernel(Common),
    /// Combined spectral, scaling and kernel checks (report.json).
    Report(Common),
}

/// Flags override values read from `--config`.
#[derive(Args, Debug, Default)]
struct Common {
    /// Plain-text `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<String>,
    /// Coupling, or `critical`.
    #[arg(long)]
    beta: Option<String>,
    /// Absolute couplings `a:b:n`, linearly spaced.
    #[arg(long)]
    beta_grid: Option<String>,
    /// Relative excesses `(β − β_cr)/β_cr` as `a:b:n`, log-spaced.
    #[arg(long)]
    excess_grid: Option<String>,
    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<String>,
    #[arg(long)]
    paths: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Halve difference steps and report refinement ratios.
    #[arg(long)]
    refine: bool,
    /// Condition the endpoint on a ball of this radius.
    #[arg(long)]
    pinned: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("d", &self.d),
            ("beta", &self.beta),
            ("beta_grid", &self.beta_grid),
            ("excess_grid", &self.excess_grid),
            ("T", &self.horizon),
            ("paths", &self.paths),
            ("seed", &self.seed),
            ("out", &self.out),
            ("pinned", &self.pinned),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.refine {
            cfg.refine = true;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, cmd): (&Common, fn(&ExperimentConfig) -> Result<(), CliError>) = match &cli.command {
        Command::CriticalBeta(c) => (c, commands::critical_beta),
        Command::ScalingScan(c) => (c, commands::scaling_scan),
        Command::Partition(c) => (c, commands::partition),
        Command::Simulate(c) => (c, commands::simulate),
        Command::CriticalKernel(c) => (c, commands::critical_kernel),
        Command::Report(c) => (c, commands::report),
    };
    let cfg = common.resolve()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(cfg.out.display().to_string(), e))?;
    cmd(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

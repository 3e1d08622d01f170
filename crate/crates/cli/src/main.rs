//! `imwa`: run, sweep and inspect iterative model weight averaging experiments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;

#[derive(Debug, Parser)]
#[command(
    name = "imwa",
    version,
    about = "Iterative model weight averaging experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train every configured arm for every seed and write results.
    Run(RunArgs),
    /// Sweep the number of episodes E.
    AblateE(SweepArgs<usize>),
    /// Sweep the number of parallel models M.
    AblateM(SweepArgs<usize>),
    /// Sweep the imbalance ratio of the synthetic dataset.
    AblateGamma(SweepArgs<f64>),
    /// Print layout, statistics and pairwise distances of checkpoints.
    Inspect {
        #[arg(required = true)]
        checkpoints: Vec<PathBuf>,
    },
    /// Write the configured dataset as train.csv and test.csv.
    ExportDataset {
        #[command(flatten)]
        overrides: Overrides,
        /// Destination directory.
        #[arg(long)]
        out: PathBuf,
        /// Generator seed for synthetic data.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Replace an existing run directory.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, clap::Args)]
struct SweepArgs<T>
where
    T: Clone + Send + Sync + std::str::FromStr + 'static,
    <T as std::str::FromStr>::Err: std::error::Error + Send + Sync + 'static,
{
    #[command(flatten)]
    overrides: Overrides,
    /// Values to sweep, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<T>,
    /// Replace an existing run directory.
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => commands::run(&a.overrides, a.force),
        Command::AblateE(a) => {
            commands::ablate(&a.overrides, a.force, commands::Sweep::Episodes(a.values))
        }
        Command::AblateM(a) => {
            commands::ablate(&a.overrides, a.force, commands::Sweep::Models(a.values))
        }
        Command::AblateGamma(a) => {
            commands::ablate(&a.overrides, a.force, commands::Sweep::Gamma(a.values))
        }
        Command::Inspect { checkpoints } => commands::inspect(&checkpoints),
        Command::ExportDataset {
            overrides,
            out,
            seed,
        } => commands::export_dataset(&overrides, &out, seed),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

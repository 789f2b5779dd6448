//! Command-line front end: load a scenario, dispatch one or many pathways,
//! assess criteria, and score transitions.
//!
//! Failures exit non-zero after printing a machine-readable JSON record to
//! stderr, so wrapping tooling can distinguish error classes without
//! scraping prose.

mod commands;
mod manifest;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pathways", version, about = "Evaluate energy-transition pathways for an islanded microgrid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct RunArgs {
    /// Scenario JSON file; series paths resolve relative to it.
    #[arg(long)]
    scenario: PathBuf,
    /// Comma-separated pathway names; defaults to every pathway in the
    /// scenario. The baseline pathway always runs (relative criteria need
    /// it) and is prepended when missing.
    #[arg(long, value_delimiter = ',')]
    pathways: Vec<String>,
    /// Window start, `YYYY-MM-DD` or RFC 3339; defaults to the series start.
    #[arg(long)]
    from: Option<String>,
    /// Window end (exclusive); defaults to the last whole day covered.
    #[arg(long)]
    to: Option<String>,
    /// Resample all series to this step before dispatch, minutes.
    #[arg(long)]
    dt: Option<u32>,
    /// Output directory, created if absent.
    #[arg(long)]
    out: PathBuf,
    /// JSON file mapping criterion names to weights; unnamed criteria
    /// weigh 1.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Seed for randomized house thermal parameters.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap for pathway- and chunk-level parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SweepParameter {
    /// Heat-pump/oil switchover temperature, °C.
    CutoffTemp,
    /// Lower comfort bound, °C.
    IndoorSetpoint,
    /// PV multiplier.
    PvScale,
}

#[derive(Subcommand)]
enum Command {
    /// Dispatch each pathway over the window, assess criteria, and write
    /// dispatch CSVs, criteria.csv, and (with ≥ 2 pathways) scores.csv.
    Run(RunArgs),
    /// Re-score an existing criteria.csv: writes the normalized matrix and
    /// scores.
    Compare {
        /// criteria.csv produced by `run` (or hand-built with its header).
        criteria_csv: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Output directory; defaults to the input file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun the pipeline over a parameter grid and tabulate savings and
    /// emission reductions per point.
    Sensitivity {
        #[command(flatten)]
        run: RunArgs,
        /// Which pathway knob the grid sweeps.
        #[arg(long, value_enum)]
        param: SweepParameter,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
    },
    /// Load and validate a scenario without solving anything.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Compare {
            criteria_csv,
            weights,
            out,
        } => commands::compare(&criteria_csv, weights.as_deref(), out.as_deref()),
        Command::Sensitivity { run, param, grid } => commands::sensitivity(&run, param, &grid),
        Command::Validate { scenario } => commands::validate(&scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", output::error_record(&e));
            ExitCode::FAILURE
        }
    }
}

//! Experiment harness: runs configured experiments and writes CSV results.
//!
//! Subcommands: `run`, `speedup`, `partition-stats`, `verify-equivalence`.
//! The run CSV has one row per (mode, threads, seed, epoch) with columns
//! `run_id, mode, algorithm, dataset, threads, seed, epoch, objective,
//! partition_time_s, update_time_s, cumulative_time_s`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::{Parser, Subcommand};

mod experiment;
mod schema;
mod speedup;
mod stats;

pub use experiment::{cmd_run, cmd_verify_equivalence, EquivalenceReport, ExperimentArgs, Prepared, RunArgs};
pub use schema::{read_run_rows, records_from_rows, RunRow, SpeedupRowOut, StatsRow};
pub use speedup::{cmd_speedup, SpeedupArgs};
pub use stats::{cmd_partition_stats, StatsArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Conflicting or missing options; the process exits with status 2.
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] conflux::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "conflux", version, about = "Conflict-free parallel stochastic updates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every (mode, threads, seed) combination and write per-epoch rows.
    Run(RunArgs),
    /// Speedup table from a run CSV.
    Speedup(SpeedupArgs),
    /// Per-batch conflict-group statistics and partition cost.
    PartitionStats(StatsArgs),
    /// Check that conflict-free runs reproduce the serial model bit for bit.
    VerifyEquivalence(ExperimentArgs),
}

/// Opens `path` for writing, or stdout when absent.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let out = open_output(args.output.as_deref())?;
            cmd_run(&args, out).map(|_| ())
        }
        Command::Speedup(args) => {
            let input = File::open(&args.input)?;
            let out = open_output(args.output.as_deref())?;
            cmd_speedup(input, out).map(|_| ())
        }
        Command::PartitionStats(args) => {
            let out = open_output(args.output.as_deref())?;
            cmd_partition_stats(&args, out).map(|_| ())
        }
        Command::VerifyEquivalence(args) => {
            let report = cmd_verify_equivalence(&args)?;
            let mut out = io::stdout().lock();
            for line in &report.lines {
                writeln!(out, "{line}")?;
            }
            if report.mismatches > 0 {
                return Err(CliError::Check(format!("{} runs differ from serial", report.mismatches)));
            }
            Ok(())
        }
    }
}

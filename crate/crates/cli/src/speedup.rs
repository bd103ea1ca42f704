use std::io::{Read, Write};
use std::path::PathBuf;

use clap::Args;

use conflux::engine::{measure_speedup, SpeedupTable};
use conflux::Mode;

use crate::schema::{read_run_rows, records_from_rows, SpeedupRowOut};
use crate::{CliError, Result};

#[derive(Debug, Clone, Args)]
pub struct SpeedupArgs {
    /// CSV written by `run`.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

/// Speedup per (mode, threads) at the common objective level, overall and
/// for update time alone. Needs a serial run in the input.
pub fn cmd_speedup<R: Read, W: Write>(input: R, out: W) -> Result<SpeedupTable> {
    let records = records_from_rows(&read_run_rows(input)?)?;
    if !records.iter().any(|r| r.mode == Mode::Serial) {
        return Err(CliError::Usage("speedup needs a serial baseline run in the CSV".into()));
    }
    let table = measure_speedup(&records)?;
    let mut w = csv::Writer::from_writer(out);
    for r in &table.rows {
        w.serialize(SpeedupRowOut::new(r, table.epsilon))?;
    }
    w.flush()?;
    Ok(table)
}

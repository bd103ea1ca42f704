//! CSV row types. Floats go through the csv serializer, which writes the
//! shortest decimal that parses back to the same value.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use conflux::engine::SpeedupRow;
use conflux::{EpochRecord, Mode, RunRecord};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run_id: String,
    pub mode: String,
    pub algorithm: String,
    pub dataset: String,
    pub threads: usize,
    pub seed: u64,
    /// Epochs completed, starting at 1.
    pub epoch: usize,
    pub objective: f64,
    pub partition_time_s: f64,
    pub update_time_s: f64,
    pub cumulative_time_s: f64,
}

impl RunRow {
    pub fn run_id(mode: Mode, threads: usize, seed: u64) -> String {
        format!("{mode}-t{threads}-s{seed}")
    }

    pub fn from_record(rec: &RunRecord, dataset: &str) -> Vec<RunRow> {
        let run_id = Self::run_id(rec.mode, rec.threads, rec.seed);
        rec.epochs
            .iter()
            .map(|e| RunRow {
                run_id: run_id.clone(),
                mode: rec.mode.to_string(),
                algorithm: rec.algorithm.clone(),
                dataset: dataset.to_string(),
                threads: rec.threads,
                seed: rec.seed,
                epoch: e.epoch + 1,
                objective: e.objective,
                partition_time_s: e.partition_time,
                update_time_s: e.update_time,
                cumulative_time_s: e.cumulative_time,
            })
            .collect()
    }
}

pub fn read_run_rows<R: Read>(input: R) -> Result<Vec<RunRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let rows = reader.deserialize().collect::<std::result::Result<Vec<RunRow>, _>>()?;
    if rows.is_empty() {
        return Err(CliError::Usage("run CSV has no rows".into()));
    }
    Ok(rows)
}

/// Regroups rows into one record per run id, in first-appearance order.
pub fn records_from_rows(rows: &[RunRow]) -> Result<Vec<RunRecord>> {
    let first = &rows[0];
    if let Some(r) = rows.iter().find(|r| r.algorithm != first.algorithm || r.dataset != first.dataset) {
        return Err(CliError::Usage(format!(
            "run CSV mixes experiments ({} on {} and {} on {})",
            first.algorithm, first.dataset, r.algorithm, r.dataset
        )));
    }
    let mut order = Vec::new();
    let mut by_id: BTreeMap<&str, RunRecord> = BTreeMap::new();
    for r in rows {
        let mode: Mode = r.mode.parse()?;
        let rec = by_id.entry(&r.run_id).or_insert_with(|| {
            order.push(r.run_id.as_str());
            RunRecord {
                mode,
                algorithm: r.algorithm.clone(),
                threads: r.threads,
                seed: r.seed,
                stepsize: f64::NAN,
                initial_objective: r.objective,
                epochs: Vec::new(),
                diverged: false,
            }
        });
        rec.epochs.push(EpochRecord {
            epoch: r.epoch.saturating_sub(1),
            objective: r.objective,
            partition_time: r.partition_time_s,
            update_time: r.update_time_s,
            cumulative_time: r.cumulative_time_s,
        });
    }
    Ok(order.into_iter().map(|id| by_id.remove(id).expect("inserted")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRowOut {
    pub mode: String,
    pub threads: usize,
    pub runs: usize,
    pub epsilon: f64,
    pub time_to_epsilon_s: f64,
    pub speedup: f64,
    pub update_time_to_epsilon_s: f64,
    pub updates_speedup: f64,
}

impl SpeedupRowOut {
    pub fn new(r: &SpeedupRow, epsilon: f64) -> Self {
        SpeedupRowOut {
            mode: r.mode.to_string(),
            threads: r.threads,
            runs: r.runs,
            epsilon,
            time_to_epsilon_s: r.time_to_epsilon,
            speedup: r.speedup,
            update_time_to_epsilon_s: r.update_time_to_epsilon,
            updates_speedup: r.updates_speedup,
        }
    }
}

/// A batch row (`scope = batch`) or an epoch aggregate (`scope = epoch`).
/// Timing columns are empty on batch rows, `batch` is empty on epoch rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub scope: String,
    pub epoch: usize,
    pub batch: Option<usize>,
    pub batch_size: usize,
    pub groups: usize,
    pub mean_group_size: f64,
    pub max_group_size: usize,
    pub induced_edges: usize,
    pub partition_time_s: Option<f64>,
    pub update_time_s: Option<f64>,
    pub partition_ratio: Option<f64>,
}

use std::collections::BTreeMap;

use log::warn;

use super::{Mode, RunRecord};
use crate::error::{input_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub mode: Mode,
    pub threads: usize,
    /// Mean wall time (partition + update) to reach epsilon across seeds.
    pub time_to_epsilon: f64,
    pub speedup: f64,
    /// Mean update-only time to reach epsilon.
    pub update_time_to_epsilon: f64,
    pub updates_speedup: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupTable {
    pub epsilon: f64,
    pub baseline_time: f64,
    pub baseline_update_time: f64,
    pub rows: Vec<SpeedupRow>,
}

/// Smallest objective reached by every run: max over runs of min over epochs.
fn epsilon(records: &[RunRecord]) -> Option<f64> {
    records
        .iter()
        .filter_map(|r| {
            r.epochs
                .iter()
                .map(|e| e.objective)
                .filter(|o| o.is_finite())
                .min_by(f64::total_cmp)
        })
        .max_by(f64::total_cmp)
}

/// (cumulative time, cumulative update time) at the first epoch reaching `eps`.
fn time_to(r: &RunRecord, eps: f64) -> Option<(f64, f64)> {
    let mut upd = 0.0;
    for e in &r.epochs {
        upd += e.update_time;
        if e.objective <= eps {
            return Some((e.cumulative_time, upd));
        }
    }
    None
}

fn is_baseline(r: &RunRecord) -> bool {
    r.mode == Mode::Serial
}

/// Speedup of every (mode, threads) configuration over the serial baseline,
/// measured as time to reach the common objective level epsilon. When there
/// is no serial run, one-thread Hogwild runs act as the baseline.
pub fn measure_speedup(records: &[RunRecord]) -> Result<SpeedupTable> {
    let eps = epsilon(records).ok_or_else(|| input_err!("no finite objectives in the records"))?;
    let mut baseline: Vec<&RunRecord> = records.iter().filter(|r| is_baseline(r)).collect();
    if baseline.is_empty() {
        baseline = records
            .iter()
            .filter(|r| r.mode == Mode::Hogwild && r.threads == 1)
            .collect();
    }
    if baseline.is_empty() {
        return Err(input_err!("speedup needs a one-thread serial baseline"));
    }

    let mean = |xs: &[(f64, f64)]| {
        let n = xs.len() as f64;
        (
            xs.iter().map(|x| x.0).sum::<f64>() / n,
            xs.iter().map(|x| x.1).sum::<f64>() / n,
        )
    };

    let base_times: Vec<(f64, f64)> = baseline.iter().filter_map(|r| time_to(r, eps)).collect();
    if base_times.is_empty() {
        return Err(input_err!("baseline never reaches epsilon {eps}"));
    }
    let (base_t, base_u) = mean(&base_times);

    let mut groups: BTreeMap<(Mode, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        match time_to(r, eps) {
            Some(t) => groups.entry((r.mode, r.threads)).or_default().push(t),
            None => warn!(
                "{} run on {} threads (seed {}) never reaches epsilon {eps}; excluded",
                r.mode, r.threads, r.seed
            ),
        }
    }
    let rows = groups
        .into_iter()
        .map(|((mode, threads), times)| {
            let (t, u) = mean(&times);
            SpeedupRow {
                mode,
                threads,
                time_to_epsilon: t,
                speedup: base_t / t,
                update_time_to_epsilon: u,
                updates_speedup: base_u / u,
                runs: times.len(),
            }
        })
        .collect();
    Ok(SpeedupTable {
        epsilon: eps,
        baseline_time: base_t,
        baseline_update_time: base_u,
        rows,
    })
}

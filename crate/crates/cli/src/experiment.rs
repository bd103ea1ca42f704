use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use log::info;

use conflux::algorithms::{instantiate, AlgorithmKind, AlgorithmParams, SagaInit};
use conflux::data::{self, filter_dense_features, Dataset, DatasetSpec};
use conflux::engine::{self, Mode, RunConfig, StepSchedule};
use conflux::{prescribed_batch_size, CcMethod, RunRecord, SamplePlan, SampleScheme};

use crate::schema::RunRow;
use crate::{CliError, Result};

/// Options shared by `run` and `verify-equivalence`.
#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long, short = 'a')]
    pub algorithm: AlgorithmKind,
    /// Dataset spec, e.g. `synth-ls:rows=10000,cols=2000,nnz=5` or `rows:PATH`.
    #[arg(long, short = 'd')]
    pub dataset: DatasetSpec,
    /// Seed for synthetic data and synthetic targets.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub threads: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Defaults to `floor((1 - epsilon) n / delta)`.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub stepsize: f64,
    /// Multiplies the stepsize after every epoch.
    #[arg(long, default_value_t = 1.0)]
    pub stepsize_decay: f64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Sampling seeds; each seed is a separate run.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seed: Vec<u64>,
    /// Drop this fraction of the highest-degree variables first.
    #[arg(long)]
    pub filter_top: Option<f64>,
    #[arg(long, default_value = "bfs")]
    pub cc_method: CcMethod,
    #[arg(long, default_value = "without")]
    pub sampling: SampleScheme,
    /// Partition the next epoch while the current one runs.
    #[arg(long)]
    pub pipeline: bool,
    /// Pin worker threads to cores.
    #[arg(long)]
    pub pin: bool,
    /// l2 weight for the weighted variants.
    #[arg(long, default_value_t = 1e-3)]
    pub decay: f64,
    /// Factor rank for completion and embeddings.
    #[arg(long, default_value_t = 8)]
    pub rank: usize,
    #[arg(long, default_value = "gradient")]
    pub saga_init: SagaInit,
    /// Eigenvector shift; defaults to 1.1 x a power-iteration estimate.
    #[arg(long)]
    pub shift: Option<f64>,
    /// Epochs per shift-and-invert outer iteration.
    #[arg(long, default_value_t = 10)]
    pub outer_every: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub exp: ExperimentArgs,
    /// Serial runs once per seed with one thread; other modes run per thread count.
    #[arg(long, value_delimiter = ',', default_value = "cyclades")]
    pub mode: Vec<Mode>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Fail unless every cyclades run ends at the serial model.
    #[arg(long)]
    pub assert_equivalence: bool,
}

/// Dataset after optional filtering, with the batch size it implies.
pub struct Prepared {
    pub data: Arc<Dataset>,
    pub delta: usize,
    pub batch_size: usize,
}

impl ExperimentArgs {
    pub fn validate(&self) -> Result<()> {
        if self.threads.is_empty() || self.threads.contains(&0) {
            return Err(CliError::Usage("--threads needs positive counts".into()));
        }
        if self.seed.is_empty() {
            return Err(CliError::Usage("--seed needs at least one value".into()));
        }
        if self.epochs == 0 {
            return Err(CliError::Usage("--epochs must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Usage(format!("--epsilon {} outside (0, 1)", self.epsilon)));
        }
        if !(self.stepsize >= 0.0 && self.stepsize.is_finite()) {
            return Err(CliError::Usage(format!("--stepsize {} is not a finite nonnegative number", self.stepsize)));
        }
        Ok(())
    }

    pub fn prepare(&self) -> Result<Prepared> {
        let mut data = data::load(&self.dataset, self.data_seed)?;
        if let Some(f) = self.filter_top {
            let (filtered, report) = filter_dense_features(&data, f)?;
            info!("filter removed {} variables, {} remain", report.removed, report.remaining);
            data = filtered;
        }
        let n = data.num_updates();
        let delta = data.graph.conflict_degree();
        let batch_size = match self.batch_size {
            Some(b) if b == 0 || b > n => {
                return Err(CliError::Usage(format!("--batch-size {b} outside [1, {n}]")));
            }
            Some(b) => b,
            None => prescribed_batch_size(n, delta, self.epsilon)?,
        };
        info!("{}: n={n} d={} delta={delta} batch={batch_size}", data.name, data.graph.num_variables());
        Ok(Prepared {
            data: Arc::new(data),
            delta,
            batch_size,
        })
    }

    pub fn params(&self, seed: u64) -> AlgorithmParams {
        AlgorithmParams {
            decay: self.decay,
            rank: self.rank,
            saga_init: self.saga_init,
            shift: self.shift,
            outer_every: self.outer_every,
            seed,
            ..AlgorithmParams::default()
        }
    }

    pub fn plan(&self, p: &Prepared, seed: u64) -> Result<SamplePlan> {
        Ok(SamplePlan::new(p.data.num_updates(), self.sampling, p.batch_size, self.epochs, seed)?)
    }

    pub fn config(&self, threads: usize, track_writes: bool) -> RunConfig {
        let mut cfg = RunConfig::new(threads, self.stepsize);
        cfg.schedule = StepSchedule {
            initial: self.stepsize,
            decay: self.stepsize_decay,
        };
        cfg.cc_method = self.cc_method;
        cfg.pipelined = self.pipeline;
        cfg.pin_threads = self.pin;
        cfg.track_writes = track_writes;
        cfg
    }

    /// One run from a fresh model; returns the record and the final model.
    pub fn execute(&self, p: &Prepared, mode: Mode, threads: usize, seed: u64, track: bool) -> Result<(RunRecord, Vec<f64>)> {
        let mut inst = instantiate(self.algorithm, p.data.clone(), &self.params(seed))?;
        let plan = self.plan(p, seed)?;
        let cfg = self.config(threads, track);
        let rec = engine::run(mode, &mut *inst.algorithm, &p.data.graph, &plan, &mut inst.model, &cfg)?;
        Ok((rec, inst.model.to_vec()))
    }
}

fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Runs every configuration and streams rows to `out`.
pub fn cmd_run<W: Write>(args: &RunArgs, out: W) -> Result<Vec<RunRecord>> {
    args.exp.validate()?;
    if args.mode.is_empty() {
        return Err(CliError::Usage("--mode needs at least one value".into()));
    }
    if args.assert_equivalence && args.mode.contains(&Mode::Hogwild) {
        return Err(CliError::Usage(
            "--assert-equivalence cannot be combined with hogwild, which is not serially equivalent".into(),
        ));
    }
    let exp = &args.exp;
    let prepared = exp.prepare()?;
    let dataset = prepared.data.name.clone();
    let mut writer = csv::Writer::from_writer(out);
    let mut records = Vec::new();

    for &seed in &exp.seed {
        let reference = if args.assert_equivalence {
            Some(exp.execute(&prepared, Mode::Serial, 1, seed, false)?.1)
        } else {
            None
        };
        for &mode in &args.mode {
            let thread_list: &[usize] = if mode == Mode::Serial { &[1] } else { &exp.threads };
            for &threads in thread_list {
                let (rec, model) = exp.execute(&prepared, mode, threads, seed, false)?;
                if let (Some(want), Mode::Cyclades) = (&reference, mode) {
                    if !bits_equal(&model, want) {
                        return Err(CliError::Check(format!(
                            "cyclades on {threads} threads (seed {seed}) differs from the serial model"
                        )));
                    }
                }
                if rec.diverged {
                    log::warn!("{mode} on {threads} threads (seed {seed}) diverged");
                }
                for row in RunRow::from_record(&rec, &dataset) {
                    writer.serialize(row)?;
                }
                records.push(rec);
            }
        }
    }
    writer.flush()?;
    Ok(records)
}

pub struct EquivalenceReport {
    pub lines: Vec<String>,
    pub mismatches: usize,
}

/// Compares cyclades runs on every thread count against the serial model,
/// with cross-thread write auditing enabled.
pub fn cmd_verify_equivalence(exp: &ExperimentArgs) -> Result<EquivalenceReport> {
    exp.validate()?;
    let prepared = exp.prepare()?;
    let mut lines = vec!["seed,threads,identical".to_string()];
    let mut mismatches = 0;
    for &seed in &exp.seed {
        let (_, serial) = exp.execute(&prepared, Mode::Serial, 1, seed, false)?;
        for &threads in &exp.threads {
            let (_, model) = exp.execute(&prepared, Mode::Cyclades, threads, seed, true)?;
            let same = bits_equal(&model, &serial);
            mismatches += (!same) as usize;
            lines.push(format!("{seed},{threads},{same}"));
        }
    }
    Ok(EquivalenceReport { lines, mismatches })
}

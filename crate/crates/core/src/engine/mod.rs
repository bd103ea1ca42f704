//! Execution of a sample plan over a model in one of three modes.
//!
//! * [`Mode::Serial`] applies every sampled update in label order on one
//!   thread. It defines the reference output.
//! * [`Mode::Cyclades`] partitions each batch into conflict groups, allocates
//!   the groups to cores and lets every core run its groups without locks.
//!   Batches are separated by a barrier. Because groups write disjoint
//!   coordinates and each group runs in label order, the final model is
//!   bit-identical to the serial one.
//! * [`Mode::Hogwild`] splits the same stream into contiguous chunks, one per
//!   thread, and applies them with no coordination at all.

mod speedup;

use std::fmt;
use std::sync::Barrier;
use std::time::{Duration, Instant};

use log::debug;

pub use speedup::{measure_speedup, SpeedupRow, SpeedupTable};

use crate::allocate::{greedy_allocate, Allocation};
use crate::error::{input_err, Error, Result};
use crate::graph::UpdateVariableGraph;
use crate::groups::{find_groups_bfs, find_groups_push_label, CcMethod, CcScratch, ConflictGroups};
use crate::model::{ModelState, ModelView, WriteTracker};
use crate::sampler::{Batch, Item, SamplePlan};

/// Per-thread scratch buffers handed to [`StochasticUpdate::apply`].
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// Labels covered by an epoch, plus its stepsize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochContext {
    pub epoch: usize,
    pub first_label: u64,
    /// One past the last label of the epoch.
    pub end_label: u64,
    pub stepsize: f64,
}

/// A member of the stochastic-updates family.
///
/// `apply` must write only the coordinates of the update's support (for block
/// models, the blocks of the supported variables) and may keep private
/// bookkeeping for those same variables. Anything touching the whole model
/// belongs in the epoch hooks, which always run on a single thread.
pub trait StochasticUpdate: Sync {
    fn name(&self) -> &str;

    /// Model coordinates per graph variable.
    fn block_size(&self) -> usize {
        1
    }

    fn begin_epoch(&mut self, _ctx: &EpochContext, _model: &mut ModelState) -> Result<()> {
        Ok(())
    }

    fn apply(&self, item: Item, model: ModelView<'_>, scratch: &mut Scratch);

    fn end_epoch(&mut self, _ctx: &EpochContext, _model: &mut ModelState) -> Result<()> {
        Ok(())
    }

    fn objective(&self, model: &ModelState) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Serial,
    Cyclades,
    Hogwild,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Serial => "serial",
            Mode::Cyclades => "cyclades",
            Mode::Hogwild => "hogwild",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Mode::Serial),
            "cyclades" => Ok(Mode::Cyclades),
            "hogwild" => Ok(Mode::Hogwild),
            other => Err(input_err!("unknown mode `{other}`")),
        }
    }
}

/// Constant stepsize, optionally multiplied by `decay` after every epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub initial: f64,
    pub decay: f64,
}

impl StepSchedule {
    pub fn constant(stepsize: f64) -> Self {
        StepSchedule {
            initial: stepsize,
            decay: 1.0,
        }
    }

    pub fn at(&self, epoch: usize) -> f64 {
        self.initial * self.decay.powi(epoch as i32)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub threads: usize,
    pub cc_method: CcMethod,
    /// Partition epoch `e + 1` on a spare thread while epoch `e` executes.
    pub pipelined: bool,
    /// Audit that no two threads write the same coordinate within a batch.
    pub track_writes: bool,
    pub pin_threads: bool,
    pub schedule: StepSchedule,
}

impl RunConfig {
    pub fn new(threads: usize, stepsize: f64) -> Self {
        RunConfig {
            threads,
            cc_method: CcMethod::Bfs,
            pipelined: false,
            track_writes: cfg!(debug_assertions),
            pin_threads: false,
            schedule: StepSchedule::constant(stepsize),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub objective: f64,
    pub partition_time: f64,
    pub update_time: f64,
    pub cumulative_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub mode: Mode,
    pub algorithm: String,
    pub threads: usize,
    pub seed: u64,
    pub stepsize: f64,
    pub initial_objective: f64,
    pub epochs: Vec<EpochRecord>,
    pub diverged: bool,
}

impl RunRecord {
    fn new(mode: Mode, algorithm: &str, threads: usize, plan: &SamplePlan, cfg: &RunConfig, initial: f64) -> Self {
        RunRecord {
            mode,
            algorithm: algorithm.to_string(),
            threads,
            seed: plan.seed,
            stepsize: cfg.schedule.initial,
            initial_objective: initial,
            epochs: Vec::new(),
            diverged: false,
        }
    }

    fn push(&mut self, epoch: usize, objective: f64, partition: Duration, update: Duration) {
        let prev = self.epochs.last().map_or(0.0, |e| e.cumulative_time);
        let (p, u) = (partition.as_secs_f64(), update.as_secs_f64());
        self.epochs.push(EpochRecord {
            epoch,
            objective,
            partition_time: p,
            update_time: u,
            cumulative_time: prev + p + u,
        });
        if is_divergent(self.initial_objective, objective) {
            self.diverged = true;
        }
    }

    pub fn final_objective(&self) -> f64 {
        self.epochs.last().map_or(self.initial_objective, |e| e.objective)
    }

    pub fn total_partition_time(&self) -> f64 {
        self.epochs.iter().map(|e| e.partition_time).sum()
    }

    pub fn total_update_time(&self) -> f64 {
        self.epochs.iter().map(|e| e.update_time).sum()
    }
}

/// Non-finite, or more than a thousand times a positive starting objective.
pub fn is_divergent(initial: f64, objective: f64) -> bool {
    !objective.is_finite() || (initial > 0.0 && objective > 1e3 * initial)
}

/// Groups and core assignment for one batch.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    pub groups: ConflictGroups,
    pub allocation: Allocation,
}

fn check_dims<A: StochasticUpdate + ?Sized>(alg: &A, g: &UpdateVariableGraph, plan: &SamplePlan, model: &ModelState) -> Result<()> {
    let want = g.num_variables() * alg.block_size();
    if model.dim() != want {
        return Err(input_err!(
            "model has {} coordinates, graph needs {} x {} = {want}",
            model.dim(),
            g.num_variables(),
            alg.block_size()
        ));
    }
    if plan.num_updates() != g.num_updates() {
        return Err(input_err!(
            "plan samples from {} updates, graph has {}",
            plan.num_updates(),
            g.num_updates()
        ));
    }
    Ok(())
}

fn epoch_context(plan: &SamplePlan, cfg: &RunConfig, epoch: usize) -> EpochContext {
    EpochContext {
        epoch,
        first_label: plan.epoch_start(epoch),
        end_label: plan.epoch_start(epoch + 1),
        stepsize: cfg.schedule.at(epoch),
    }
}

fn pin(cfg: &RunConfig, thread: usize) {
    if !cfg.pin_threads {
        return;
    }
    if let Some(ids) = core_affinity::get_core_ids() {
        if !ids.is_empty() {
            core_affinity::set_for_current(ids[thread % ids.len()]);
        }
    }
}

/// Dispatches to the runner for `mode`.
pub fn run<A: StochasticUpdate + ?Sized>(
    mode: Mode,
    alg: &mut A,
    g: &UpdateVariableGraph,
    plan: &SamplePlan,
    model: &mut ModelState,
    cfg: &RunConfig,
) -> Result<RunRecord> {
    match mode {
        Mode::Serial => run_serial(alg, g, plan, model, cfg),
        Mode::Cyclades => run_cyclades(alg, g, plan, model, cfg),
        Mode::Hogwild => run_hogwild(alg, g, plan, model, cfg),
    }
}

/// Applies every sampled update in label order on the calling thread.
pub fn run_serial<A: StochasticUpdate + ?Sized>(
    alg: &mut A,
    g: &UpdateVariableGraph,
    plan: &SamplePlan,
    model: &mut ModelState,
    cfg: &RunConfig,
) -> Result<RunRecord> {
    check_dims(alg, g, plan, model)?;
    let mut rec = RunRecord::new(Mode::Serial, alg.name(), 1, plan, cfg, alg.objective(model));
    let mut scratch = Scratch::default();
    for epoch in 0..plan.epochs {
        let ctx = epoch_context(plan, cfg, epoch);
        let t0 = Instant::now();
        alg.begin_epoch(&ctx, model)?;
        let seq = plan.epoch_sequence(epoch);
        {
            let alg = &*alg;
            let view = model.view();
            for (k, &update) in seq.iter().enumerate() {
                let item = Item {
                    label: ctx.first_label + k as u64,
                    update,
                };
                alg.apply(item, view, &mut scratch);
            }
        }
        alg.end_epoch(&ctx, model)?;
        let update_time = t0.elapsed();
        model.applied = ctx.end_label;
        let obj = alg.objective(model);
        rec.push(epoch, obj, Duration::ZERO, update_time);
    }
    model.diverged |= rec.diverged;
    Ok(rec)
}

fn plan_batch(g: &UpdateVariableGraph, batch: &Batch, cores: usize, scratch: &mut CcScratch) -> BatchPlan {
    let groups = find_groups_bfs(g, batch, scratch);
    let allocation = greedy_allocate(&groups, g, cores);
    BatchPlan { groups, allocation }
}

/// Samples, partitions and allocates every batch of an epoch. With BFS the
/// batches are spread round-robin over `threads` workers; with push-label the
/// batches are processed one after another, each using all workers.
pub fn partition_epoch(
    g: &UpdateVariableGraph,
    plan: &SamplePlan,
    epoch: usize,
    threads: usize,
    method: CcMethod,
    scratches: &mut [CcScratch],
) -> Result<Vec<BatchPlan>> {
    let threads = threads.max(1);
    assert!(!scratches.is_empty());
    let batches = plan.epoch_batches(epoch);
    match method {
        CcMethod::PushLabel => batches
            .iter()
            .map(|b| {
                let groups = find_groups_push_label(g, b, threads, &mut scratches[0])?;
                let allocation = greedy_allocate(&groups, g, threads);
                Ok(BatchPlan { groups, allocation })
            })
            .collect(),
        CcMethod::Bfs => {
            let workers = threads.min(scratches.len()).min(batches.len()).max(1);
            if workers == 1 {
                return Ok(batches
                    .iter()
                    .map(|b| plan_batch(g, b, threads, &mut scratches[0]))
                    .collect());
            }
            let mut parts: Vec<Vec<(usize, BatchPlan)>> = Vec::with_capacity(workers);
            std::thread::scope(|s| {
                let handles: Vec<_> = scratches[..workers]
                    .iter_mut()
                    .enumerate()
                    .map(|(t, scratch)| {
                        let batches = &batches;
                        s.spawn(move || {
                            (t..batches.len())
                                .step_by(workers)
                                .map(|i| (i, plan_batch(g, &batches[i], threads, scratch)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                for h in handles {
                    parts.push(h.join().expect("partition worker panicked"));
                }
            });
            let mut slots: Vec<Option<BatchPlan>> = (0..batches.len()).map(|_| None).collect();
            for (i, p) in parts.into_iter().flatten() {
                slots[i] = Some(p);
            }
            Ok(slots.into_iter().map(|p| p.expect("every batch planned")).collect())
        }
    }
}

/// Runs the update phase of an epoch: every worker processes its groups of
/// batch `b`, then waits at the barrier before batch `b + 1`.
fn execute_epoch<A: StochasticUpdate + ?Sized>(
    alg: &A,
    plans: &[BatchPlan],
    model: &ModelState,
    threads: usize,
    tracker: Option<&WriteTracker>,
    cfg: &RunConfig,
) {
    // A worker panicking on a short allocation would leave the others stuck
    // at the barrier.
    assert!(plans.iter().all(|p| p.allocation.num_cores() == threads));
    let barrier = Barrier::new(threads);
    let worker = |t: usize| {
        pin(cfg, t);
        let mut scratch = Scratch::default();
        for p in plans {
            let view = ModelView::tracked(&model.x, tracker, WriteTracker::tag(p.groups.batch_index, t));
            for &gi in &p.allocation.per_core[t] {
                for &item in p.groups.group(gi as usize) {
                    alg.apply(item, view, &mut scratch);
                }
            }
            barrier.wait();
        }
    };
    std::thread::scope(|s| {
        for t in 0..threads {
            let worker = &worker;
            s.spawn(move || worker(t));
        }
    });
}

/// Conflict-free parallel execution; output equals [`run_serial`] bit for bit.
pub fn run_cyclades<A: StochasticUpdate + ?Sized>(
    alg: &mut A,
    g: &UpdateVariableGraph,
    plan: &SamplePlan,
    model: &mut ModelState,
    cfg: &RunConfig,
) -> Result<RunRecord> {
    check_dims(alg, g, plan, model)?;
    let threads = cfg.threads.max(1);
    let tracker = cfg.track_writes.then(|| WriteTracker::new(model.dim()));
    let mut rec = RunRecord::new(Mode::Cyclades, alg.name(), threads, plan, cfg, alg.objective(model));
    let mut scratches: Vec<CcScratch> = (0..threads).map(|_| CcScratch::new(g.num_variables())).collect();
    let mut spare = cfg.pipelined.then(|| CcScratch::new(g.num_variables()));
    let mut pending: Option<Vec<BatchPlan>> = None;

    for epoch in 0..plan.epochs {
        let ctx = epoch_context(plan, cfg, epoch);
        let t0 = Instant::now();
        alg.begin_epoch(&ctx, model)?;
        let mut update_time = t0.elapsed();

        let t1 = Instant::now();
        let plans = match pending.take() {
            Some(p) => p,
            None => partition_epoch(g, plan, epoch, threads, cfg.cc_method, &mut scratches)?,
        };
        let mut partition_time = t1.elapsed();
        debug!(
            "epoch {epoch}: {} batches, {} groups",
            plans.len(),
            plans.iter().map(|p| p.groups.num_groups()).sum::<usize>()
        );

        let t2 = Instant::now();
        let prefetch = epoch + 1 < plan.epochs;
        match spare.as_mut().filter(|_| prefetch) {
            Some(scratch) => {
                // Next epoch's stream does not depend on the model, so it can
                // be partitioned while this one executes.
                let (next, waited) = std::thread::scope(|s| {
                    let h = s.spawn(|| partition_epoch(g, plan, epoch + 1, threads, CcMethod::Bfs, std::slice::from_mut(scratch)));
                    execute_epoch(&*alg, &plans, model, threads, tracker.as_ref(), cfg);
                    let done = Instant::now();
                    let next = h.join().expect("pipeline worker panicked");
                    (next, done.elapsed())
                });
                update_time += t2.elapsed() - waited;
                partition_time += waited;
                pending = Some(next?);
            }
            None => {
                execute_epoch(&*alg, &plans, model, threads, tracker.as_ref(), cfg);
                update_time += t2.elapsed();
            }
        }

        if let Some(t) = &tracker {
            if t.violations() > 0 {
                return Err(Error::Invariant(format!(
                    "{} overlapping writes across threads in epoch {epoch} (first at coordinate {:?})",
                    t.violations(),
                    t.first_violation()
                )));
            }
        }

        let t3 = Instant::now();
        alg.end_epoch(&ctx, model)?;
        update_time += t3.elapsed();
        model.applied = ctx.end_label;
        let obj = alg.objective(model);
        rec.push(epoch, obj, partition_time, update_time);
    }
    model.diverged |= rec.diverged;
    Ok(rec)
}

/// Lock-free racy execution of the same stream split into contiguous chunks.
pub fn run_hogwild<A: StochasticUpdate + ?Sized>(
    alg: &mut A,
    g: &UpdateVariableGraph,
    plan: &SamplePlan,
    model: &mut ModelState,
    cfg: &RunConfig,
) -> Result<RunRecord> {
    check_dims(alg, g, plan, model)?;
    let threads = cfg.threads.max(1);
    let mut rec = RunRecord::new(Mode::Hogwild, alg.name(), threads, plan, cfg, alg.objective(model));
    for epoch in 0..plan.epochs {
        let ctx = epoch_context(plan, cfg, epoch);
        let t0 = Instant::now();
        alg.begin_epoch(&ctx, model)?;
        let seq = plan.epoch_sequence(epoch);
        let chunk = seq.len().div_ceil(threads);
        {
            let alg = &*alg;
            let model = &*model;
            std::thread::scope(|s| {
                for t in 0..threads {
                    let lo = (t * chunk).min(seq.len());
                    let hi = ((t + 1) * chunk).min(seq.len());
                    let seq = &seq;
                    s.spawn(move || {
                        pin(cfg, t);
                        let mut scratch = Scratch::default();
                        let view = model.view();
                        for k in lo..hi {
                            let item = Item {
                                label: ctx.first_label + k as u64,
                                update: seq[k],
                            };
                            alg.apply(item, view, &mut scratch);
                        }
                    });
                }
            });
        }
        alg.end_epoch(&ctx, model)?;
        let update_time = t0.elapsed();
        model.applied = ctx.end_label;
        let obj = alg.objective(model);
        rec.push(epoch, obj, Duration::ZERO, update_time);
    }
    model.diverged |= rec.diverged;
    Ok(rec)
}

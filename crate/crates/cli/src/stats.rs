use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use conflux::algorithms::{instantiate, AlgorithmKind, AlgorithmParams};
use conflux::data::DatasetSpec;
use conflux::engine::{self, partition_epoch, Mode, RunConfig};
use conflux::{CcMethod, CcScratch, SampleScheme};

use crate::experiment::ExperimentArgs;
use crate::schema::StatsRow;
use crate::Result;

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[arg(long, short = 'd')]
    pub dataset: DatasetSpec,
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// Algorithm timed for the partition-to-epoch ratio.
    #[arg(long, short = 'a', default_value = "sgd")]
    pub algorithm: AlgorithmKind,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub stepsize: f64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub filter_top: Option<f64>,
    #[arg(long, default_value = "bfs")]
    pub cc_method: CcMethod,
    #[arg(long, default_value = "without")]
    pub sampling: SampleScheme,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

impl StatsArgs {
    fn experiment(&self) -> ExperimentArgs {
        let d = AlgorithmParams::default();
        ExperimentArgs {
            algorithm: self.algorithm,
            dataset: self.dataset.clone(),
            data_seed: self.data_seed,
            threads: vec![self.threads],
            epochs: self.epochs,
            batch_size: self.batch_size,
            stepsize: self.stepsize,
            stepsize_decay: 1.0,
            epsilon: self.epsilon,
            seed: vec![self.seed],
            filter_top: self.filter_top,
            cc_method: self.cc_method,
            sampling: self.sampling,
            pipeline: false,
            pin: false,
            decay: d.decay,
            rank: d.rank,
            saga_init: d.saga_init,
            shift: d.shift,
            outer_every: d.outer_every,
        }
    }
}

/// Writes one row per batch and one aggregate per epoch. The aggregate's
/// times come from a cyclades run over the same batches.
pub fn cmd_partition_stats<W: Write>(args: &StatsArgs, out: W) -> Result<Vec<StatsRow>> {
    let exp = args.experiment();
    exp.validate()?;
    let prepared = exp.prepare()?;
    let g = &prepared.data.graph;
    let plan = exp.plan(&prepared, args.seed)?;
    let threads = args.threads;

    let mut inst = instantiate(args.algorithm, prepared.data.clone(), &exp.params(args.seed))?;
    let mut cfg: RunConfig = exp.config(threads, false);
    cfg.pipelined = false;
    let rec = engine::run(Mode::Cyclades, &mut *inst.algorithm, g, &plan, &mut inst.model, &cfg)?;

    let mut scratches: Vec<CcScratch> = (0..threads).map(|_| CcScratch::new(g.num_variables())).collect();
    let mut rows = Vec::new();
    for epoch in 0..plan.epochs {
        let plans = partition_epoch(g, &plan, epoch, threads, args.cc_method, &mut scratches)?;
        let (mut items, mut groups, mut max, mut edges) = (0, 0, 0, 0);
        for (k, p) in plans.iter().enumerate() {
            let gr = &p.groups;
            rows.push(StatsRow {
                scope: "batch".into(),
                epoch: epoch + 1,
                batch: Some(k),
                batch_size: gr.num_items(),
                groups: gr.num_groups(),
                mean_group_size: gr.mean_group_size(),
                max_group_size: gr.max_group_size(),
                induced_edges: gr.induced_edges,
                partition_time_s: None,
                update_time_s: None,
                partition_ratio: None,
            });
            items += gr.num_items();
            groups += gr.num_groups();
            max = max.max(gr.max_group_size());
            edges += gr.induced_edges;
        }
        let e = &rec.epochs[epoch];
        let total = e.partition_time + e.update_time;
        rows.push(StatsRow {
            scope: "epoch".into(),
            epoch: epoch + 1,
            batch: None,
            batch_size: items,
            groups,
            mean_group_size: if groups == 0 { 0.0 } else { items as f64 / groups as f64 },
            max_group_size: max,
            induced_edges: edges,
            partition_time_s: Some(e.partition_time),
            update_time_s: Some(e.update_time),
            partition_ratio: Some(if total > 0.0 { e.partition_time / total } else { 0.0 }),
        });
    }

    let mut w = csv::Writer::from_writer(out);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

use std::hint::black_box;
use std::sync::Arc;

use conflux::algorithms::{instantiate, AlgorithmKind, AlgorithmParams};
use conflux::data::synth_least_squares;
use conflux::engine::{self, partition_epoch, Mode, RunConfig};
use conflux::{
    find_groups_bfs, find_groups_push_label, greedy_allocate_weights, prescribed_batch_size, CcMethod, CcScratch,
    Dataset, SamplePlan, SampleScheme,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn dataset() -> Arc<Dataset> {
    Arc::new(synth_least_squares(100_000, 50_000, 5, 0.1, 1).unwrap().dataset)
}

fn plan(d: &Dataset, epochs: usize) -> SamplePlan {
    let g = &d.graph;
    let b = prescribed_batch_size(g.num_updates(), g.conflict_degree(), 0.5).unwrap();
    SamplePlan::new(g.num_updates(), SampleScheme::WithoutReplacement, b, epochs, 0).unwrap()
}

fn components(c: &mut Criterion) {
    let d = dataset();
    let g = &d.graph;
    let batch = plan(&d, 1).epoch_batches(0).remove(0);
    let mut scratch = CcScratch::new(g.num_variables());
    let mut group = c.benchmark_group("components");
    group.throughput(Throughput::Elements(batch.len() as u64));
    group.bench_function("bfs", |b| b.iter(|| black_box(find_groups_bfs(g, &batch, &mut scratch))));
    for threads in [1, 4] {
        group.bench_with_input(BenchmarkId::new("push-label", threads), &threads, |b, &t| {
            b.iter(|| black_box(find_groups_push_label(g, &batch, t, &mut scratch).unwrap()))
        });
    }
    group.finish();
}

fn allocation(c: &mut Criterion) {
    let weights: Vec<u64> = (0..10_000u64).map(|i| 1 + (i * 7919) % 97).collect();
    let mut group = c.benchmark_group("allocation");
    for cores in [4, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(cores), &cores, |b, &p| {
            b.iter(|| black_box(greedy_allocate_weights(&weights, p)))
        });
    }
    group.finish();
}

fn partition(c: &mut Criterion) {
    let d = dataset();
    let p = plan(&d, 1);
    let mut scratches: Vec<CcScratch> = (0..4).map(|_| CcScratch::new(d.graph.num_variables())).collect();
    let mut group = c.benchmark_group("partition-epoch");
    group.sample_size(10);
    for (name, method) in [("bfs", CcMethod::Bfs), ("push-label", CcMethod::PushLabel)] {
        group.bench_function(name, |b| {
            b.iter(|| black_box(partition_epoch(&d.graph, &p, 0, 4, method, &mut scratches).unwrap()))
        });
    }
    group.finish();
}

fn epochs(c: &mut Criterion) {
    let d = dataset();
    let p = plan(&d, 1);
    let mut group = c.benchmark_group("sgd-epoch");
    group.sample_size(10);
    group.throughput(Throughput::Elements(d.num_updates() as u64));
    for (mode, threads) in [(Mode::Serial, 1), (Mode::Cyclades, 1), (Mode::Cyclades, 4), (Mode::Hogwild, 4)] {
        let mut cfg = RunConfig::new(threads, 0.01);
        cfg.track_writes = false;
        group.bench_function(format!("{mode}-{threads}"), |b| {
            b.iter(|| {
                let mut inst = instantiate(AlgorithmKind::Sgd, d.clone(), &AlgorithmParams::default()).unwrap();
                black_box(engine::run(mode, &mut *inst.algorithm, &d.graph, &p, &mut inst.model, &cfg).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, components, allocation, partition, epochs);
criterion_main!(benches);

use std::sync::Arc;

use conflux::algorithms::{instantiate, AlgorithmKind, AlgorithmParams};
use conflux::data::synth_least_squares;
use conflux::engine::{self, measure_speedup, Mode, RunConfig};
use conflux::{SamplePlan, SampleScheme};

fn ls() -> Arc<conflux::Dataset> {
    Arc::new(synth_least_squares(2000, 500, 4, 0.1, 5).unwrap().dataset)
}

fn run(mode: Mode, threads: usize, stepsize: f64, seed: u64) -> conflux::RunRecord {
    let d = ls();
    let plan = SamplePlan::new(d.num_updates(), SampleScheme::WithoutReplacement, 100, 5, seed).unwrap();
    let mut inst = instantiate(AlgorithmKind::Sgd, d.clone(), &AlgorithmParams::default()).unwrap();
    let cfg = RunConfig::new(threads, stepsize);
    engine::run(mode, &mut *inst.algorithm, &d.graph, &plan, &mut inst.model, &cfg).unwrap()
}

#[test]
fn hogwild_makes_progress_with_many_threads() {
    let rec = run(Mode::Hogwild, 4, 0.05, 1);
    assert!(!rec.diverged);
    assert!(rec.final_objective() < 0.5 * rec.initial_objective);
    assert!(rec.epochs.iter().all(|e| e.partition_time == 0.0));
}

#[test]
fn huge_stepsize_is_flagged_divergent() {
    let rec = run(Mode::Serial, 1, 50.0, 1);
    assert!(rec.diverged);
}

#[test]
fn speedup_table_covers_every_configuration() {
    let mut records = Vec::new();
    for seed in 0..2 {
        records.push(run(Mode::Serial, 1, 0.05, seed));
        for threads in [1, 2] {
            records.push(run(Mode::Cyclades, threads, 0.05, seed));
            records.push(run(Mode::Hogwild, threads, 0.05, seed));
        }
    }
    let table = measure_speedup(&records).unwrap();
    assert_eq!(table.rows.len(), 5);
    let serial = table.rows.iter().find(|r| r.mode == Mode::Serial).unwrap();
    assert!((serial.speedup - 1.0).abs() < 1e-12);
    assert!(table.rows.iter().all(|r| r.speedup > 0.0 && r.updates_speedup > 0.0));
    // Epsilon is reached by every run, so none are dropped.
    assert!(table.rows.iter().all(|r| r.runs == 2));
}

#[test]
fn speedup_needs_a_baseline() {
    let records = vec![run(Mode::Cyclades, 2, 0.05, 0)];
    assert!(measure_speedup(&records).is_err());
}

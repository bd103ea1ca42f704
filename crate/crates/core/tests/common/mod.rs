//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use std::sync::Arc;

use conflux::algorithms::{gather, EigenProblem, SparseLoss};
use conflux::data::Dataset;
use conflux::engine::{self, Mode, RunConfig};
use conflux::groups::ConflictGroups;
use conflux::sampler::{Batch, SamplePlan};
use conflux::{StochasticUpdate, UpdateVariableGraph};

/// Plain union-find with path halving.
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components of a batch as sorted lists of batch positions, ordered by
/// their smallest position. Two items conflict when their supports share a
/// variable, checked pairwise.
pub fn union_find_groups(g: &UpdateVariableGraph, batch: &Batch) -> Vec<Vec<usize>> {
    let b = batch.items.len();
    let mut uf = UnionFind::new(b);
    let mut owner: std::collections::HashMap<u32, usize> = Default::default();
    for (k, it) in batch.items.iter().enumerate() {
        for &v in g.support(it.update as usize) {
            match owner.get(&v) {
                Some(&o) => uf.union(o, k),
                None => {
                    owner.insert(v, k);
                }
            }
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in 0..b {
        let r = uf.find(k);
        by_root.entry(r).or_default().push(k);
    }
    let mut out: Vec<Vec<usize>> = by_root.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Same shape as [`union_find_groups`], read from engine output.
pub fn as_positions(groups: &ConflictGroups, batch: &Batch) -> Vec<Vec<usize>> {
    let first = batch.items.first().map_or(0, |it| it.label);
    let mut out: Vec<Vec<usize>> = groups
        .groups()
        .map(|gr| gr.iter().map(|it| (it.label - first) as usize).collect())
        .collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Brute-force conflict degree over all update pairs.
pub fn brute_conflict_degree(supports: &[Vec<u32>]) -> usize {
    let n = supports.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&k| k != i && supports[i].iter().any(|v| supports[k].contains(v)))
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// `|a - b|_inf / max(|b|_inf, 1e-300)`.
pub fn rel_dev(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max).max(1e-300);
    num / den
}

pub fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn dense_grad<L: SparseLoss>(loss: &L, i: usize, x: &[f64]) -> Vec<f64> {
    let g = loss.graph();
    let r = loss.block_size();
    let mut xs = Vec::new();
    gather(g, r, i, |k| x[k], &mut xs);
    let mut gs = vec![0.0; xs.len()];
    loss.sample_grad(i, &xs, &mut gs);
    let mut out = vec![0.0; x.len()];
    for (k, &v) in g.support(i).iter().enumerate() {
        for c in 0..r {
            out[v as usize * r + c] = gs[k * r + c];
        }
    }
    out
}

/// Dense weighted SGD: every coordinate decays every step.
pub fn eager_weighted_sgd<L: SparseLoss>(loss: &L, decay: f64, gamma: f64, plan: &SamplePlan, x0: &[f64]) -> Vec<f64> {
    let mut x = x0.to_vec();
    for e in 0..plan.epochs {
        for i in plan.epoch_sequence(e) {
            let grad = dense_grad(loss, i as usize, &x);
            for j in 0..x.len() {
                x[j] = (1.0 - gamma * decay) * x[j] - gamma * grad[j];
            }
        }
    }
    x
}

/// Dense SAGA with a full `n x d` gradient table initialized at `x0`.
pub fn eager_saga<L: SparseLoss>(loss: &L, gamma: f64, plan: &SamplePlan, x0: &[f64], zero_init: bool) -> Vec<f64> {
    let n = loss.graph().num_updates();
    let mut x = x0.to_vec();
    let mut table: Vec<Vec<f64>> = (0..n)
        .map(|i| if zero_init { vec![0.0; x.len()] } else { dense_grad(loss, i, &x) })
        .collect();
    let mut avg = vec![0.0; x.len()];
    for row in &table {
        for (a, g) in avg.iter_mut().zip(row) {
            *a += g;
        }
    }
    avg.iter_mut().for_each(|a| *a /= n as f64);
    for e in 0..plan.epochs {
        for i in plan.epoch_sequence(e) {
            let i = i as usize;
            let grad = dense_grad(loss, i, &x);
            for j in 0..x.len() {
                x[j] -= gamma * (grad[j] - table[i][j] + avg[j]);
                avg[j] += (grad[j] - table[i][j]) / n as f64;
            }
            table[i] = grad;
        }
    }
    x
}

/// Dense SVRG with the anchor refreshed every epoch.
pub fn eager_svrg<L: SparseLoss>(loss: &L, gamma: f64, plan: &SamplePlan, x0: &[f64]) -> Vec<f64> {
    let n = loss.graph().num_updates();
    let mut x = x0.to_vec();
    for e in 0..plan.epochs {
        let y = x.clone();
        let mut g = vec![0.0; x.len()];
        for i in 0..n {
            for (a, b) in g.iter_mut().zip(dense_grad(loss, i, &y)) {
                *a += b / n as f64;
            }
        }
        for i in plan.epoch_sequence(e) {
            let gx = dense_grad(loss, i as usize, &x);
            let gy = dense_grad(loss, i as usize, &y);
            for j in 0..x.len() {
                x[j] -= gamma * (gx[j] - gy[j] + g[j]);
            }
        }
    }
    x
}

/// Dense SVRG on `F_i = n f_i` for the shifted quadratic.
pub fn eager_svrg_dense(p: &EigenProblem, gamma: f64, plan: &SamplePlan, x0: &[f64]) -> Vec<f64> {
    let n = p.num_rows() as f64;
    let mut x = x0.to_vec();
    for e in 0..plan.epochs {
        let y = x.clone();
        let g = p.full_gradient(&y);
        for i in plan.epoch_sequence(e) {
            let gx = p.sample_gradient(i as usize, &x);
            let gy = p.sample_gradient(i as usize, &y);
            for j in 0..x.len() {
                x[j] -= gamma * (n * gx[j] - n * gy[j] + g[j]);
            }
        }
    }
    x
}

/// Runs `alg` from `x0` in `mode` and returns the final model.
pub fn run_mode<A: StochasticUpdate + ?Sized>(
    mode: Mode,
    alg: &mut A,
    g: &UpdateVariableGraph,
    plan: &SamplePlan,
    mut model: conflux::ModelState,
    cfg: &RunConfig,
) -> Vec<f64> {
    engine::run(mode, alg, g, plan, &mut model, cfg).expect("run succeeds");
    model.to_vec()
}

pub fn arc(d: Dataset) -> Arc<Dataset> {
    Arc::new(d)
}

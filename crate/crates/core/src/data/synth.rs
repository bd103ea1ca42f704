//! Seeded synthetic instances.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal, Zipf};

use super::{Dataset, EdgeList};
use crate::error::{input_err, Result};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

#[derive(Debug, Clone)]
pub struct SynthLeastSquares {
    pub dataset: Dataset,
    pub x_true: Vec<f64>,
}

/// Sparse `A` with `nnz_per_row` uniformly placed standard-normal entries per
/// row and `b = A x + noise z` for standard-normal `x`, `z`.
pub fn synth_least_squares(rows: usize, cols: usize, nnz_per_row: usize, noise: f64, seed: u64) -> Result<SynthLeastSquares> {
    if nnz_per_row > cols {
        return Err(input_err!("{nnz_per_row} nonzeros per row but only {cols} columns"));
    }
    let mut r = rng(seed);
    let x_true: Vec<f64> = (0..cols).map(|_| normal(&mut r)).collect();
    let mut data = Vec::with_capacity(rows);
    let mut targets = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut idx: Vec<u32> = sample(&mut r, cols, nnz_per_row).into_iter().map(|c| c as u32).collect();
        idx.sort_unstable();
        let row: Vec<(u32, f64)> = idx.into_iter().map(|c| (c, normal(&mut r))).collect();
        let ax: f64 = row.iter().map(|&(c, v)| v * x_true[c as usize]).sum();
        targets.push(ax + noise * normal(&mut r));
        data.push(row);
    }
    let name = format!("synth-ls:rows={rows},cols={cols},nnz={nnz_per_row}");
    Ok(SynthLeastSquares {
        dataset: Dataset::from_rows(name, data, targets, cols)?,
        x_true,
    })
}

/// Entries of `M = U V^T` with Gaussian factors of the given rank, each
/// observed independently with probability `observed`. Factors are scaled so
/// entries have unit variance.
pub fn synth_ratings(rows: usize, cols: usize, rank: usize, observed: f64, seed: u64) -> Result<Dataset> {
    if rank == 0 || !(0.0..=1.0).contains(&observed) {
        return Err(input_err!("need rank > 0 and observed fraction in [0, 1]"));
    }
    let mut r = rng(seed);
    let scale = (rank as f64).powf(-0.25);
    let u: Vec<f64> = (0..rows * rank).map(|_| scale * normal(&mut r)).collect();
    let v: Vec<f64> = (0..cols * rank).map(|_| scale * normal(&mut r)).collect();
    let mut entries = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if r.random::<f64>() < observed {
                let m = (0..rank).map(|k| u[i * rank + k] * v[j * rank + k]).sum();
                entries.push((i as u32, j as u32, m));
            }
        }
    }
    let name = format!("synth-ratings:rows={rows},cols={cols},rank={rank},observed={observed}");
    Dataset::from_ratings(name, rows, cols, entries)
}

/// `pairs` distinct word pairs `w <= w'` with counts `1 + Poisson(5)`.
pub fn synth_cooccurrence(words: usize, pairs: usize, seed: u64) -> Result<Dataset> {
    let max_pairs = words * (words + 1) / 2;
    if pairs > max_pairs {
        return Err(input_err!("{pairs} pairs requested but only {max_pairs} exist"));
    }
    let mut r = rng(seed);
    let counts = Poisson::new(5.0).expect("valid rate");
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(pairs);
    while out.len() < pairs {
        let a = r.random_range(0..words as u32);
        let b = r.random_range(0..words as u32);
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            let c: f64 = counts.sample(&mut r);
            out.push((key.0, key.1, 1.0 + c));
        }
    }
    Dataset::from_cooccurrence(format!("synth-cooccur:words={words},pairs={pairs}"), words, out)
}

/// Uniform random simple graph with `round(nodes * avg_degree / 2)` edges.
pub fn synth_graph(nodes: usize, avg_degree: f64, seed: u64) -> Result<EdgeList> {
    let m = (nodes as f64 * avg_degree / 2.0).round() as usize;
    let max_edges = nodes * nodes.saturating_sub(1) / 2;
    if m > max_edges {
        return Err(input_err!("average degree {avg_degree} impossible on {nodes} nodes"));
    }
    let mut r = rng(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let a = r.random_range(0..nodes as u32);
        let b = r.random_range(0..nodes as u32);
        if a != b && seen.insert((a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b), 1.0));
        }
    }
    edges.sort_by_key(|e| (e.0, e.1));
    Ok(EdgeList {
        num_vertices: nodes,
        edges,
    })
}

/// Binary feature rows whose feature ids follow a Zipf law with the given
/// exponent, so a few features appear in most rows. Labels in {0, 1} come
/// from a random logistic model.
pub fn synth_power_law_rows(rows: usize, cols: usize, nnz_per_row: usize, exponent: f64, seed: u64) -> Result<Dataset> {
    if nnz_per_row > cols || cols == 0 {
        return Err(input_err!("{nnz_per_row} nonzeros per row but only {cols} columns"));
    }
    let zipf = Zipf::new(cols as f64, exponent).map_err(|e| input_err!("zipf exponent {exponent}: {e}"))?;
    let mut r = rng(seed);
    let w: Vec<f64> = (0..cols).map(|_| normal(&mut r)).collect();
    let mut data = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    let mut row: Vec<u32> = Vec::with_capacity(nnz_per_row);
    for _ in 0..rows {
        row.clear();
        let mut tries = 0;
        while row.len() < nnz_per_row && tries < 20 * nnz_per_row {
            let f = zipf.sample(&mut r) as u32 - 1;
            if !row.contains(&f) {
                row.push(f);
            }
            tries += 1;
        }
        row.sort_unstable();
        let z: f64 = row.iter().map(|&f| w[f as usize]).sum();
        let p = 1.0 / (1.0 + (-z).exp());
        labels.push(if r.random::<f64>() < p { 1.0 } else { 0.0 });
        data.push(row.iter().map(|&f| (f, 1.0)).collect());
    }
    let name = format!("synth-powerlaw:rows={rows},cols={cols},nnz={nnz_per_row},exponent={exponent}");
    Dataset::from_rows(name, data, labels, cols)
}

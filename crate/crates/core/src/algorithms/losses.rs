//! Per-sample losses with gradients restricted to the sample's support.
//!
//! A loss sees only the gathered coordinates of its support: for support
//! `[v_0, v_1, ...]` and block size `r`, `xs[k * r + c]` is coordinate `c`
//! of variable `v_k`. Gradients are returned in the same layout.

use std::sync::Arc;

use crate::data::{Dataset, Payload};
use crate::error::{input_err, Result};
use crate::graph::UpdateVariableGraph;

pub trait SparseLoss: Send + Sync {
    fn name(&self) -> &'static str;

    fn graph(&self) -> &UpdateVariableGraph;

    fn block_size(&self) -> usize {
        1
    }

    fn sample_loss(&self, i: usize, xs: &[f64]) -> f64;

    fn sample_grad(&self, i: usize, xs: &[f64], grad: &mut [f64]);

    /// Full objective. Defaults to the mean of the sample losses.
    fn objective(&self, x: &[f64]) -> f64 {
        let g = self.graph();
        let mut xs = Vec::new();
        let n = g.num_updates();
        let total: f64 = (0..n)
            .map(|i| {
                gather(g, self.block_size(), i, |k| x[k], &mut xs);
                self.sample_loss(i, &xs)
            })
            .sum();
        total / n.max(1) as f64
    }

    /// Epoch-boundary hook for losses with global constants.
    fn refresh(&mut self, _x: &[f64]) {}
}

/// Collects the support coordinates of update `i` into `out`.
#[inline]
pub fn gather(g: &UpdateVariableGraph, r: usize, i: usize, read: impl Fn(usize) -> f64, out: &mut Vec<f64>) {
    out.clear();
    for &v in g.support(i) {
        let base = v as usize * r;
        out.extend((base..base + r).map(&read));
    }
}

fn row_payload(d: &Dataset) -> Result<(&[f64], &[f64])> {
    d.rows()
        .ok_or_else(|| input_err!("dataset `{}` has no sparse rows", d.name))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `f_i(x) = (a_i . x - b_i)^2`; the objective is the mean.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    data: Arc<Dataset>,
}

impl LeastSquares {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        row_payload(&data)?;
        Ok(LeastSquares { data })
    }

    #[inline]
    fn row(&self, i: usize) -> (&[f64], f64) {
        let (values, targets) = self.data.rows().expect("checked at construction");
        (&values[self.data.graph.edge_range(i)], targets[i])
    }
}

impl SparseLoss for LeastSquares {
    fn name(&self) -> &'static str {
        "least-squares"
    }

    fn graph(&self) -> &UpdateVariableGraph {
        &self.data.graph
    }

    fn sample_loss(&self, i: usize, xs: &[f64]) -> f64 {
        let (a, b) = self.row(i);
        let r = dot(a, xs) - b;
        r * r
    }

    fn sample_grad(&self, i: usize, xs: &[f64], grad: &mut [f64]) {
        let (a, b) = self.row(i);
        let s = 2.0 * (dot(a, xs) - b);
        for (g, &aj) in grad.iter_mut().zip(a) {
            *g = s * aj;
        }
    }
}

/// Logistic loss `log(1 + e^z) - y z` with `z = a_i . x` and `y` in {0, 1}.
/// Targets greater than zero count as the positive class.
#[derive(Debug, Clone)]
pub struct Logistic {
    data: Arc<Dataset>,
}

impl Logistic {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        row_payload(&data)?;
        Ok(Logistic { data })
    }

    #[inline]
    fn row(&self, i: usize) -> (&[f64], f64) {
        let (values, targets) = self.data.rows().expect("checked at construction");
        let y = if targets[i] > 0.0 { 1.0 } else { 0.0 };
        (&values[self.data.graph.edge_range(i)], y)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl SparseLoss for Logistic {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn graph(&self) -> &UpdateVariableGraph {
        &self.data.graph
    }

    fn sample_loss(&self, i: usize, xs: &[f64]) -> f64 {
        let (a, y) = self.row(i);
        let z = dot(a, xs);
        softplus(z) - y * z
    }

    fn sample_grad(&self, i: usize, xs: &[f64], grad: &mut [f64]) {
        let (a, y) = self.row(i);
        let s = sigmoid(dot(a, xs)) - y;
        for (g, &aj) in grad.iter_mut().zip(a) {
            *g = s * aj;
        }
    }
}

/// Low-rank completion. Variable `i < num_rows` is row `U_i`, variable
/// `num_rows + j` is column `V_j`, each a block of `rank` coordinates.
/// `f_e = |Omega| (U_i . V_j - M_ij)^2`, so the mean over observed entries is
/// the plain sum of squared residuals.
#[derive(Debug, Clone)]
pub struct MatrixCompletion {
    data: Arc<Dataset>,
    rank: usize,
    scale: f64,
}

impl MatrixCompletion {
    pub fn new(data: Arc<Dataset>, rank: usize) -> Result<Self> {
        let Payload::Ratings { entries, .. } = &data.payload else {
            return Err(input_err!("dataset `{}` has no ratings", data.name));
        };
        if rank == 0 {
            return Err(input_err!("rank must be positive"));
        }
        let scale = entries.len() as f64;
        Ok(MatrixCompletion { data, rank, scale })
    }

    #[inline]
    fn target(&self, e: usize) -> f64 {
        match &self.data.payload {
            Payload::Ratings { entries, .. } => entries[e].2,
            _ => unreachable!("checked at construction"),
        }
    }
}

impl SparseLoss for MatrixCompletion {
    fn name(&self) -> &'static str {
        "matrix-completion"
    }

    fn graph(&self) -> &UpdateVariableGraph {
        &self.data.graph
    }

    fn block_size(&self) -> usize {
        self.rank
    }

    fn sample_loss(&self, e: usize, xs: &[f64]) -> f64 {
        let (u, v) = xs.split_at(self.rank);
        let r = dot(u, v) - self.target(e);
        self.scale * r * r
    }

    fn sample_grad(&self, e: usize, xs: &[f64], grad: &mut [f64]) {
        let (u, v) = xs.split_at(self.rank);
        let s = 2.0 * self.scale * (dot(u, v) - self.target(e));
        let (gu, gv) = grad.split_at_mut(self.rank);
        for k in 0..self.rank {
            gu[k] = s * v[k];
            gv[k] = s * u[k];
        }
    }
}

/// Embedding fit to log co-occurrence counts:
/// `f = A (log A - |v_w + v_w'|^2 - C)^2`, objective the sum over pairs.
#[derive(Debug, Clone)]
pub struct WordEmbedding {
    data: Arc<Dataset>,
    rank: usize,
    /// The shared offset `C`.
    pub offset: f64,
}

impl WordEmbedding {
    /// `x0` sets the initial offset through [`SparseLoss::refresh`].
    pub fn new(data: Arc<Dataset>, rank: usize, x0: &[f64]) -> Result<Self> {
        if !matches!(data.payload, Payload::Cooccurrence { .. }) {
            return Err(input_err!("dataset `{}` has no co-occurrence counts", data.name));
        }
        if rank == 0 {
            return Err(input_err!("rank must be positive"));
        }
        let mut w = WordEmbedding { data, rank, offset: 0.0 };
        w.refresh(x0);
        Ok(w)
    }

    #[inline]
    fn count(&self, i: usize) -> f64 {
        match &self.data.payload {
            Payload::Cooccurrence { pairs, .. } => pairs[i].2,
            _ => unreachable!("checked at construction"),
        }
    }

    /// `|v_w + v_w'|^2` over gathered coordinates; a self pair has one block.
    #[inline]
    fn sum_sq(&self, xs: &[f64]) -> f64 {
        let r = self.rank;
        if xs.len() == r {
            4.0 * dot(xs, xs)
        } else {
            (0..r).map(|k| (xs[k] + xs[r + k]).powi(2)).sum()
        }
    }
}

impl SparseLoss for WordEmbedding {
    fn name(&self) -> &'static str {
        "word-embedding"
    }

    fn graph(&self) -> &UpdateVariableGraph {
        &self.data.graph
    }

    fn block_size(&self) -> usize {
        self.rank
    }

    fn sample_loss(&self, i: usize, xs: &[f64]) -> f64 {
        let a = self.count(i);
        let r = a.ln() - self.sum_sq(xs) - self.offset;
        a * r * r
    }

    fn sample_grad(&self, i: usize, xs: &[f64], grad: &mut [f64]) {
        let a = self.count(i);
        let rank = self.rank;
        let res = a.ln() - self.sum_sq(xs) - self.offset;
        if xs.len() == rank {
            for k in 0..rank {
                grad[k] = -16.0 * a * res * xs[k];
            }
        } else {
            for k in 0..rank {
                let s = xs[k] + xs[rank + k];
                grad[k] = -4.0 * a * res * s;
                grad[rank + k] = grad[k];
            }
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let g = self.graph();
        let mut xs = Vec::new();
        (0..g.num_updates())
            .map(|i| {
                gather(g, self.rank, i, |k| x[k], &mut xs);
                self.sample_loss(i, &xs)
            })
            .sum()
    }

    /// Sets `C` to its minimizer given the embeddings.
    fn refresh(&mut self, x: &[f64]) {
        let g = self.data.graph.clone();
        let mut xs = Vec::new();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..g.num_updates() {
            gather(&g, self.rank, i, |k| x[k], &mut xs);
            let a = self.count(i);
            num += a * (a.ln() - self.sum_sq(&xs));
            den += a;
        }
        self.offset = if den > 0.0 { num / den } else { 0.0 };
    }
}

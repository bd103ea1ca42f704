//! Top eigenvector of `A^T A` by shift-and-invert, with each linear solve
//! approximated by SVRG steps on
//! `f(x) = 1/2 x^T (lambda I - A^T A) x - b^T x = sum_i f_i(x)`,
//! `f_i(x) = 1/2 x^T (lambda/n I - a_i a_i^T) x - b^T x / n`.
//!
//! SVRG runs on the rescaled samples `F_i = n f_i`, whose mean is `f`. Their
//! gradients have the dense-linear form
//! `[grad F_i(x)]_j = lambda x_j - b_j - n a_ij (a_i . x)`,
//! so every coordinate follows `x_j <- (1 - mu) x_j - nu_j + h_ij` with
//! `mu = gamma lambda`, `nu_j = gamma (g_j - lambda y_j)` and `h_ij` nonzero
//! only on the support of row `i`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::engine::{EpochContext, Scratch, StochasticUpdate};
use crate::error::{input_err, Error, Result};
use crate::graph::UpdateVariableGraph;
use crate::model::{ModelState, ModelView};
use crate::sampler::Item;

use super::lazy::{lazy_catchup, LazyClock};

/// The shifted quadratic for one shift-and-invert solve.
#[derive(Debug, Clone)]
pub struct EigenProblem {
    data: Arc<Dataset>,
    pub lambda: f64,
    pub b: Vec<f64>,
}

impl EigenProblem {
    pub fn new(data: Arc<Dataset>, lambda: f64, b: Vec<f64>) -> Result<Self> {
        if data.rows().is_none() {
            return Err(input_err!("dataset `{}` has no sparse rows", data.name));
        }
        if b.len() != data.graph.num_variables() {
            return Err(input_err!("b has length {}, expected {}", b.len(), data.graph.num_variables()));
        }
        Ok(EigenProblem { data, lambda, b })
    }

    pub fn graph(&self) -> &UpdateVariableGraph {
        &self.data.graph
    }

    pub fn num_rows(&self) -> usize {
        self.data.num_updates()
    }

    pub fn data(&self) -> &Arc<Dataset> {
        &self.data
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let ax = self.data.mat_vec(x);
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let axax: f64 = ax.iter().map(|v| v * v).sum();
        let bx: f64 = self.b.iter().zip(x).map(|(b, x)| b * x).sum();
        0.5 * self.lambda * xx - 0.5 * axax - bx
    }

    /// `lambda x - A^T A x - b`.
    pub fn full_gradient(&self, x: &[f64]) -> Vec<f64> {
        let ata = gram_mul(&self.data, x);
        (0..x.len()).map(|j| self.lambda * x[j] - ata[j] - self.b[j]).collect()
    }

    pub fn sample_objective(&self, i: usize, x: &[f64]) -> f64 {
        let n = self.num_rows() as f64;
        let (cols, vals) = self.data.row(i);
        let ax: f64 = cols.iter().zip(vals).map(|(&c, v)| v * x[c as usize]).sum();
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let bx: f64 = self.b.iter().zip(x).map(|(b, x)| b * x).sum();
        0.5 * self.lambda / n * xx - 0.5 * ax * ax - bx / n
    }

    /// Dense `grad f_i(x) = (lambda/n I - a_i a_i^T) x - b / n`.
    pub fn sample_gradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let n = self.num_rows() as f64;
        let (cols, vals) = self.data.row(i);
        let ax: f64 = cols.iter().zip(vals).map(|(&c, v)| v * x[c as usize]).sum();
        let mut g: Vec<f64> = (0..x.len()).map(|j| self.lambda / n * x[j] - self.b[j] / n).collect();
        for (&c, v) in cols.iter().zip(vals) {
            g[c as usize] -= v * ax;
        }
        g
    }
}

/// `A^T A x` for a row dataset.
pub fn gram_mul(data: &Dataset, x: &[f64]) -> Vec<f64> {
    let ax = data.mat_vec(x);
    let mut out = vec![0.0; x.len()];
    for (i, axi) in ax.iter().enumerate() {
        let (cols, vals) = data.row(i);
        for (&c, v) in cols.iter().zip(vals) {
            out[c as usize] += v * axi;
        }
    }
    out
}

/// `x^T A^T A x / x^T x`.
pub fn rayleigh_quotient(data: &Dataset, x: &[f64]) -> f64 {
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let ax = data.mat_vec(x);
    ax.iter().map(|v| v * v).sum::<f64>() / xx
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn random_unit(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    normalize(&mut w);
    w
}

/// Power iteration on `A^T A`; returns the eigenvalue estimate and vector.
pub fn power_iteration(data: &Dataset, iters: usize, seed: u64) -> (f64, Vec<f64>) {
    let d = data.graph.num_variables();
    let mut w = random_unit(d, seed);
    let mut est = 0.0;
    for _ in 0..iters {
        let mut next = gram_mul(data, &w);
        est = normalize(&mut next);
        if est == 0.0 {
            break;
        }
        w = next;
    }
    (est, w)
}

/// Shift `1.1 x` the power-iteration estimate of the top eigenvalue.
pub fn default_shift(data: &Dataset, seed: u64) -> f64 {
    1.1 * power_iteration(data, 200, seed).0
}

/// SVRG with dense linear gradients, optionally driving shift-and-invert
/// outer iterations every `outer_every` epochs.
pub struct SvrgDenseLinear {
    problem: EigenProblem,
    outer_every: Option<usize>,
    gamma: f64,
    anchor: Vec<f64>,
    full_grad: Vec<f64>,
    anchor_epoch: Option<usize>,
    clock: LazyClock,
}

impl SvrgDenseLinear {
    pub fn new(problem: EigenProblem) -> Self {
        let clock = LazyClock::new(problem.graph().num_variables());
        SvrgDenseLinear {
            problem,
            outer_every: None,
            gamma: 0.0,
            anchor: Vec::new(),
            full_grad: Vec::new(),
            anchor_epoch: None,
            clock,
        }
    }

    /// Shift-and-invert from a random unit start. Returns the algorithm and
    /// its starting model `w / (lambda - w^T A^T A w)` for `b = w`.
    pub fn shift_invert(data: Arc<Dataset>, lambda: f64, outer_every: usize, seed: u64) -> Result<(Self, ModelState)> {
        if outer_every == 0 {
            return Err(input_err!("outer iterations need at least one epoch each"));
        }
        let w = random_unit(data.graph.num_variables(), seed);
        let x0 = outer_start(&data, lambda, &w)?;
        let mut alg = SvrgDenseLinear::new(EigenProblem::new(data, lambda, w)?);
        alg.outer_every = Some(outer_every);
        Ok((alg, ModelState::from_vec(x0)))
    }

    pub fn problem(&self) -> &EigenProblem {
        &self.problem
    }

    /// The current eigenvector estimate: `b` for shift-and-invert runs.
    pub fn direction(&self) -> &[f64] {
        &self.problem.b
    }
}

fn outer_start(data: &Dataset, lambda: f64, w: &[f64]) -> Result<Vec<f64>> {
    let gap = lambda - rayleigh_quotient(data, w);
    if !(gap > 0.0) {
        return Err(input_err!("shift {lambda} does not exceed the Rayleigh quotient of the start"));
    }
    Ok(w.iter().map(|v| v / gap).collect())
}

impl StochasticUpdate for SvrgDenseLinear {
    fn name(&self) -> &str {
        "svrg-eigen"
    }

    fn begin_epoch(&mut self, ctx: &EpochContext, model: &mut ModelState) -> Result<()> {
        self.gamma = ctx.stepsize;
        if !(self.gamma * self.problem.lambda < 1.0) {
            return Err(input_err!(
                "stepsize {} times shift {} must be below 1",
                self.gamma,
                self.problem.lambda
            ));
        }
        self.anchor = model.to_vec();
        self.full_grad = self.problem.full_gradient(&self.anchor);
        self.anchor_epoch = Some(ctx.epoch);
        self.clock.reset(ctx.first_label);
        Ok(())
    }

    fn apply(&self, item: Item, model: ModelView<'_>, s: &mut Scratch) {
        let i = item.update as usize;
        let (cols, vals) = self.problem.data.row(i);
        let gamma = self.gamma;
        let lambda = self.problem.lambda;
        let mu = gamma * lambda;
        let n = self.problem.num_rows() as f64;
        let t = LazyClock::time_of(item.label);

        // s.c holds the per-step drift nu_j.
        s.a.clear();
        s.c.clear();
        for &c in cols {
            let j = c as usize;
            let nu = gamma * (self.full_grad[j] - lambda * self.anchor[j]);
            let tau = self.clock.skipped(j, t);
            s.a.push(lazy_catchup(model.get(j), mu, nu / (1.0 - mu), tau));
            s.c.push(nu);
        }
        let dx: f64 = vals.iter().zip(&s.a).map(|(v, x)| v * x).sum();
        let dy: f64 = cols.iter().zip(vals).map(|(&c, v)| v * self.anchor[c as usize]).sum();
        let h = gamma * n * (dx - dy);
        for (k, &c) in cols.iter().enumerate() {
            model.set(c as usize, (1.0 - mu) * s.a[k] - s.c[k] + h * vals[k]);
            self.clock.touch(c as usize, t);
        }
    }

    fn end_epoch(&mut self, ctx: &EpochContext, model: &mut ModelState) -> Result<()> {
        if self.anchor_epoch != Some(ctx.epoch) {
            return Err(Error::Invariant(format!(
                "SVRG anchor from epoch {:?} used in epoch {}",
                self.anchor_epoch, ctx.epoch
            )));
        }
        let lambda = self.problem.lambda;
        let mu = self.gamma * lambda;
        for j in 0..self.clock.len() {
            let nu = self.gamma * (self.full_grad[j] - lambda * self.anchor[j]);
            let tau = self.clock.pending(j, ctx.end_label);
            model.x.set(j, lazy_catchup(model.x.get(j), mu, nu / (1.0 - mu), tau));
        }
        self.clock.reset(ctx.end_label);

        if let Some(k) = self.outer_every {
            if (ctx.epoch + 1).is_multiple_of(k) {
                let mut w = model.to_vec();
                if normalize(&mut w) > 0.0 {
                    let x0 = outer_start(&self.problem.data, lambda, &w)?;
                    self.problem.b = w;
                    model.x.copy_from(&x0);
                }
            }
        }
        Ok(())
    }

    fn objective(&self, model: &ModelState) -> f64 {
        self.problem.objective(&model.to_vec())
    }
}

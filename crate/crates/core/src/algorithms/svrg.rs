use crate::engine::{EpochContext, Scratch, StochasticUpdate};
use crate::error::{Error, Result};
use crate::model::{ModelState, ModelView};
use crate::sampler::Item;

use super::lazy::LazyClock;
use super::losses::{gather, SparseLoss};

/// SVRG for losses with sparse sample gradients.
///
/// The anchor `y` is refreshed at the start of every epoch, together with
/// `g = (1/n) sum_i grad f_i(y)`. The dense `-gamma g` part of every step is
/// applied lazily.
pub struct SvrgSparse<L> {
    loss: L,
    gamma: f64,
    anchor: Vec<f64>,
    full_grad: Vec<f64>,
    anchor_epoch: Option<usize>,
    clock: LazyClock,
}

impl<L: SparseLoss> SvrgSparse<L> {
    pub fn new(loss: L) -> Self {
        let clock = LazyClock::new(loss.graph().num_variables());
        SvrgSparse {
            loss,
            gamma: 0.0,
            anchor: Vec::new(),
            full_grad: Vec::new(),
            anchor_epoch: None,
            clock,
        }
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn full_gradient(&self) -> &[f64] {
        &self.full_grad
    }
}

/// `(1/n) sum_i grad f_i(x)` as a dense vector.
pub fn mean_gradient<L: SparseLoss + ?Sized>(loss: &L, x: &[f64]) -> Vec<f64> {
    let g = loss.graph();
    let r = loss.block_size();
    let n = g.num_updates().max(1) as f64;
    let mut out = vec![0.0; x.len()];
    let (mut xs, mut grad) = (Vec::new(), Vec::new());
    for i in 0..g.num_updates() {
        gather(g, r, i, |k| x[k], &mut xs);
        grad.resize(xs.len(), 0.0);
        loss.sample_grad(i, &xs, &mut grad);
        for (k, &v) in g.support(i).iter().enumerate() {
            for c in 0..r {
                out[v as usize * r + c] += grad[k * r + c];
            }
        }
    }
    out.iter_mut().for_each(|v| *v /= n);
    out
}

impl<L: SparseLoss> StochasticUpdate for SvrgSparse<L> {
    fn name(&self) -> &str {
        "svrg"
    }

    fn block_size(&self) -> usize {
        self.loss.block_size()
    }

    fn begin_epoch(&mut self, ctx: &EpochContext, model: &mut ModelState) -> Result<()> {
        self.gamma = ctx.stepsize;
        self.anchor = model.to_vec();
        self.full_grad = mean_gradient(&self.loss, &self.anchor);
        self.anchor_epoch = Some(ctx.epoch);
        self.clock.reset(ctx.first_label);
        Ok(())
    }

    fn apply(&self, item: Item, model: ModelView<'_>, s: &mut Scratch) {
        let i = item.update as usize;
        let g = self.loss.graph();
        let r = self.loss.block_size();
        let gamma = self.gamma;
        let t = LazyClock::time_of(item.label);

        s.a.clear();
        for &v in g.support(i) {
            let tau = self.clock.skipped(v as usize, t) as f64;
            let base = v as usize * r;
            s.a.extend((base..base + r).map(|k| model.get(k) - gamma * tau * self.full_grad[k]));
        }
        gather(g, r, i, |k| self.anchor[k], &mut s.c);
        s.b.resize(s.a.len(), 0.0);
        s.d.resize(s.a.len(), 0.0);
        self.loss.sample_grad(i, &s.a, &mut s.b);
        self.loss.sample_grad(i, &s.c, &mut s.d);

        for (k, &v) in g.support(i).iter().enumerate() {
            for c in 0..r {
                let idx = k * r + c;
                let j = v as usize * r + c;
                model.set(j, s.a[idx] - gamma * (s.b[idx] - s.d[idx] + self.full_grad[j]));
            }
            self.clock.touch(v as usize, t);
        }
    }

    fn end_epoch(&mut self, ctx: &EpochContext, model: &mut ModelState) -> Result<()> {
        if self.anchor_epoch != Some(ctx.epoch) {
            return Err(Error::Invariant(format!(
                "SVRG anchor from epoch {:?} used in epoch {}",
                self.anchor_epoch, ctx.epoch
            )));
        }
        let r = self.loss.block_size();
        for v in 0..self.clock.len() {
            let tau = self.clock.pending(v, ctx.end_label) as f64;
            for j in v * r..(v + 1) * r {
                model.x.set(j, model.x.get(j) - self.gamma * tau * self.full_grad[j]);
            }
        }
        self.clock.reset(ctx.end_label);
        self.loss.refresh(&model.to_vec());
        Ok(())
    }

    fn objective(&self, model: &ModelState) -> f64 {
        self.loss.objective(&model.to_vec())
    }
}

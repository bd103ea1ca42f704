use crate::engine::{EpochContext, Scratch, StochasticUpdate};
use crate::error::Result;
use crate::model::{ModelState, ModelView};
use crate::sampler::Item;

use super::lazy::{lazy_catchup, LazyClock};
use super::losses::{gather, SparseLoss};

/// SGD with optional l2 weight decay `eta`:
/// `x <- (1 - gamma eta) x - gamma grad f_i(x)`.
///
/// With `eta > 0` the decay of untouched coordinates is deferred and applied
/// in closed form on their next touch or at the end of the epoch.
pub struct Sgd<L> {
    loss: L,
    decay: f64,
    gamma: f64,
    clock: Option<LazyClock>,
    name: &'static str,
}

impl<L: SparseLoss> Sgd<L> {
    pub fn new(loss: L) -> Self {
        Sgd {
            loss,
            decay: 0.0,
            gamma: 0.0,
            clock: None,
            name: "sgd",
        }
    }

    pub fn weighted(loss: L, decay: f64) -> Self {
        let clock = LazyClock::new(loss.graph().num_variables());
        Sgd {
            loss,
            decay,
            gamma: 0.0,
            clock: Some(clock),
            name: "weighted-sgd",
        }
    }

    pub fn named(mut self, name: &'static str) -> Self {
        self.name = name;
        self
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }

    fn flush(&self, end_label: u64, model: &ModelState) {
        let Some(clock) = &self.clock else { return };
        let r = self.loss.block_size();
        let mu = self.gamma * self.decay;
        for v in 0..clock.len() {
            let tau = clock.pending(v, end_label);
            for k in v * r..(v + 1) * r {
                model.x.set(k, lazy_catchup(model.x.get(k), mu, 0.0, tau));
            }
        }
        clock.reset(end_label);
    }
}

impl<L: SparseLoss> StochasticUpdate for Sgd<L> {
    fn name(&self) -> &str {
        self.name
    }

    fn block_size(&self) -> usize {
        self.loss.block_size()
    }

    fn begin_epoch(&mut self, ctx: &EpochContext, _model: &mut ModelState) -> Result<()> {
        self.gamma = ctx.stepsize;
        Ok(())
    }

    fn apply(&self, item: Item, model: ModelView<'_>, s: &mut Scratch) {
        let i = item.update as usize;
        let g = self.loss.graph();
        let r = self.loss.block_size();
        let gamma = self.gamma;
        match &self.clock {
            None => {
                gather(g, r, i, |k| model.get(k), &mut s.a);
                s.b.resize(s.a.len(), 0.0);
                self.loss.sample_grad(i, &s.a, &mut s.b);
                for (k, &v) in g.support(i).iter().enumerate() {
                    for c in 0..r {
                        let idx = k * r + c;
                        model.set(v as usize * r + c, s.a[idx] - gamma * s.b[idx]);
                    }
                }
            }
            Some(clock) => {
                let t = LazyClock::time_of(item.label);
                let mu = gamma * self.decay;
                s.a.clear();
                for &v in g.support(i) {
                    let tau = clock.skipped(v as usize, t);
                    let base = v as usize * r;
                    s.a.extend((base..base + r).map(|k| lazy_catchup(model.get(k), mu, 0.0, tau)));
                }
                s.b.resize(s.a.len(), 0.0);
                self.loss.sample_grad(i, &s.a, &mut s.b);
                for (k, &v) in g.support(i).iter().enumerate() {
                    for c in 0..r {
                        let idx = k * r + c;
                        model.set(v as usize * r + c, (1.0 - mu) * s.a[idx] - gamma * s.b[idx]);
                    }
                    clock.touch(v as usize, t);
                }
            }
        }
    }

    fn end_epoch(&mut self, ctx: &EpochContext, model: &mut ModelState) -> Result<()> {
        self.flush(ctx.end_label, model);
        self.loss.refresh(&model.to_vec());
        Ok(())
    }

    /// Loss plus `eta / 2 |x|^2`.
    fn objective(&self, model: &ModelState) -> f64 {
        let x = model.to_vec();
        let reg = if self.decay > 0.0 {
            0.5 * self.decay * x.iter().map(|v| v * v).sum::<f64>()
        } else {
            0.0
        };
        self.loss.objective(&x) + reg
    }
}

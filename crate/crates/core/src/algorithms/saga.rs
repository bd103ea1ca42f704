use crate::engine::{EpochContext, Scratch, StochasticUpdate};
use crate::error::Result;
use crate::model::{ModelState, ModelView, SharedVec};
use crate::sampler::Item;

use super::lazy::LazyClock;
use super::losses::{gather, SparseLoss};

/// Starting contents of the per-sample gradient memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SagaInit {
    /// `g_i = grad f_i(x_0)`.
    #[default]
    Gradient,
    Zeros,
}

impl std::str::FromStr for SagaInit {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(SagaInit::Gradient),
            "zeros" => Ok(SagaInit::Zeros),
            other => Err(crate::error::input_err!("unknown SAGA init `{other}`")),
        }
    }
}

/// SAGA with a lazily applied average-gradient term.
///
/// Memory is kept per edge of the update-variable graph, so `g_i` only stores
/// its support. The average `avg_j` of coordinate `j` changes only when an
/// update touching `j` runs, so skipped steps are exactly `-gamma tau avg_j`.
pub struct Saga<L> {
    loss: L,
    init: SagaInit,
    initialized: bool,
    gamma: f64,
    memory: SharedVec,
    avg: SharedVec,
    clock: LazyClock,
}

impl<L: SparseLoss> Saga<L> {
    pub fn new(loss: L, init: SagaInit) -> Self {
        let g = loss.graph();
        let r = loss.block_size();
        let memory = SharedVec::zeros(g.num_edges() * r);
        let avg = SharedVec::zeros(g.num_variables() * r);
        let clock = LazyClock::new(g.num_variables());
        Saga {
            loss,
            init,
            initialized: false,
            gamma: 0.0,
            memory,
            avg,
            clock,
        }
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }

    /// `(1/n) sum_i g_i` recomputed from memory.
    pub fn recomputed_average(&self) -> Vec<f64> {
        let g = self.loss.graph();
        let r = self.loss.block_size();
        let n = g.num_updates().max(1) as f64;
        let mut sum = vec![0.0; self.avg.len()];
        for i in 0..g.num_updates() {
            let e0 = g.edge_range(i).start * r;
            for (k, &v) in g.support(i).iter().enumerate() {
                for c in 0..r {
                    sum[v as usize * r + c] += self.memory.get(e0 + k * r + c);
                }
            }
        }
        sum.iter_mut().for_each(|s| *s /= n);
        sum
    }

    /// Maintained average, for consistency checks.
    pub fn running_average(&self) -> Vec<f64> {
        self.avg.to_vec()
    }

    fn initialize(&mut self, x: &[f64]) {
        self.initialized = true;
        if self.init == SagaInit::Zeros {
            return;
        }
        let g = self.loss.graph();
        let r = self.loss.block_size();
        let n = g.num_updates().max(1) as f64;
        let mut sum = vec![0.0; self.avg.len()];
        let (mut xs, mut grad) = (Vec::new(), Vec::new());
        for i in 0..g.num_updates() {
            gather(g, r, i, |k| x[k], &mut xs);
            grad.resize(xs.len(), 0.0);
            self.loss.sample_grad(i, &xs, &mut grad);
            let e0 = g.edge_range(i).start * r;
            for (k, &v) in g.support(i).iter().enumerate() {
                for c in 0..r {
                    self.memory.set(e0 + k * r + c, grad[k * r + c]);
                    sum[v as usize * r + c] += grad[k * r + c];
                }
            }
        }
        for (j, s) in sum.iter().enumerate() {
            self.avg.set(j, s / n);
        }
    }
}

impl<L: SparseLoss> StochasticUpdate for Saga<L> {
    fn name(&self) -> &str {
        "saga"
    }

    fn block_size(&self) -> usize {
        self.loss.block_size()
    }

    fn begin_epoch(&mut self, ctx: &EpochContext, model: &mut ModelState) -> Result<()> {
        self.gamma = ctx.stepsize;
        if !self.initialized {
            self.initialize(&model.to_vec());
        }
        Ok(())
    }

    fn apply(&self, item: Item, model: ModelView<'_>, s: &mut Scratch) {
        let i = item.update as usize;
        let g = self.loss.graph();
        let r = self.loss.block_size();
        let gamma = self.gamma;
        let inv_n = 1.0 / g.num_updates() as f64;
        let t = LazyClock::time_of(item.label);

        s.a.clear();
        for &v in g.support(i) {
            let tau = self.clock.skipped(v as usize, t) as f64;
            let base = v as usize * r;
            s.a.extend((base..base + r).map(|k| model.get(k) - gamma * tau * self.avg.get(k)));
        }
        s.b.resize(s.a.len(), 0.0);
        self.loss.sample_grad(i, &s.a, &mut s.b);

        let e0 = g.edge_range(i).start * r;
        for (k, &v) in g.support(i).iter().enumerate() {
            for c in 0..r {
                let idx = k * r + c;
                let j = v as usize * r + c;
                let old = self.memory.get(e0 + idx);
                let avg = self.avg.get(j);
                model.set(j, s.a[idx] - gamma * (s.b[idx] - old + avg));
                self.avg.set(j, avg + (s.b[idx] - old) * inv_n);
                self.memory.set(e0 + idx, s.b[idx]);
            }
            self.clock.touch(v as usize, t);
        }
    }

    fn end_epoch(&mut self, ctx: &EpochContext, model: &mut ModelState) -> Result<()> {
        let r = self.loss.block_size();
        for v in 0..self.clock.len() {
            let tau = self.clock.pending(v, ctx.end_label) as f64;
            for j in v * r..(v + 1) * r {
                model.x.set(j, model.x.get(j) - self.gamma * tau * self.avg.get(j));
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

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algorithms::losses::LeastSquares;
    use crate::data::Dataset;
    use crate::engine::EpochContext;

    /// f_1 = (x - 1)^2, f_2 = (x + 1)^2.
    fn pair() -> LeastSquares {
        let d = Dataset::from_rows("p", vec![vec![(0, 1.0)], vec![(0, 1.0)]], vec![1.0, -1.0], 1).unwrap();
        LeastSquares::new(Arc::new(d)).unwrap()
    }

    fn first_step(init: SagaInit) -> f64 {
        let mut alg = Saga::new(pair(), init);
        let mut m = ModelState::zeros(1);
        let ctx = EpochContext {
            epoch: 0,
            first_label: 0,
            end_label: 2,
            stepsize: 0.1,
        };
        alg.begin_epoch(&ctx, &mut m).unwrap();
        alg.apply(Item { label: 0, update: 0 }, m.view(), &mut Scratch::default());
        m.x.get(0)
    }

    #[test]
    fn gradient_memory_cancels_first_step() {
        assert_eq!(first_step(SagaInit::Gradient), 0.0);
    }

    #[test]
    fn zero_memory_first_step() {
        assert!((first_step(SagaInit::Zeros) - 0.2).abs() < 1e-15);
    }
}

//! Deferred per-coordinate updates.
//!
//! Many dense-looking updates have the form `x_j <- (1 - mu) x_j - nu + h_ij`
//! with `h_ij = 0` off the sampled support. Coordinates outside the support
//! can skip the identical affine steps and catch up in closed form the next
//! time they are touched.

use crate::model::SharedCounters;

/// Applies `tau` skipped steps in closed form:
/// `(1 - mu)^tau x - nu * sum_{k=1..tau} (1 - mu)^k`.
///
/// Note the sum starts at `k = 1`. For the recurrence `x <- (1 - mu) x - nu'`
/// pass `nu = nu' / (1 - mu)`; when `mu = 0` the two coincide.
pub fn lazy_catchup(x: f64, mu: f64, nu: f64, tau: u64) -> f64 {
    if tau == 0 {
        return x;
    }
    if mu == 0.0 {
        return x - nu * tau as f64;
    }
    let q = 1.0 - mu;
    let qt = q.powi(tau.min(i32::MAX as u64) as i32);
    qt * x - (nu / mu) * q * (1.0 - qt)
}

/// Per-variable last-touch labels.
///
/// Labels are 1-based: the update with stream label `l` runs at time `l + 1`.
/// A variable last touched at time `rho` and touched again at `t` has missed
/// `t - rho - 1` steps; racy executions can see `rho >= t`, which counts as 0.
#[derive(Debug)]
pub struct LazyClock {
    rho: SharedCounters,
}

impl LazyClock {
    pub fn new(num_variables: usize) -> Self {
        LazyClock {
            rho: SharedCounters::new(num_variables),
        }
    }

    #[inline]
    pub fn time_of(label: u64) -> u64 {
        label + 1
    }

    /// Missed steps of `var` before time `t`, thresholded at zero.
    #[inline]
    pub fn skipped(&self, var: usize, t: u64) -> u64 {
        t.saturating_sub(self.rho.get(var) + 1)
    }

    #[inline]
    pub fn touch(&self, var: usize, t: u64) {
        self.rho.set(var, t)
    }

    /// Missed steps of `var` up to and including time `end`.
    #[inline]
    pub fn pending(&self, var: usize, end: u64) -> u64 {
        end.saturating_sub(self.rho.get(var))
    }

    pub fn reset(&self, t: u64) {
        self.rho.fill(t)
    }

    pub fn last(&self, var: usize) -> u64 {
        self.rho.get(var)
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

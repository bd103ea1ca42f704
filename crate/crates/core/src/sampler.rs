//! Deterministic sample streams.
//!
//! Every sampled update carries a global label: its position in the serial
//! processing order. The stream for an epoch depends only on the seed, the
//! scheme and the epoch index, never on batch size or thread count, so a
//! serial run and any parallel run consume exactly the same sequence.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleScheme {
    WithReplacement,
    #[default]
    WithoutReplacement,
}

impl std::str::FromStr for SampleScheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with" | "with-replacement" | "with_replacement" => Ok(Self::WithReplacement),
            "without" | "without-replacement" | "without_replacement" => {
                Ok(Self::WithoutReplacement)
            }
            other => Err(input_err!("unknown sampling scheme `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePlan {
    pub scheme: SampleScheme,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    num_updates: usize,
}

impl SamplePlan {
    pub fn new(
        num_updates: usize,
        scheme: SampleScheme,
        batch_size: usize,
        epochs: usize,
        seed: u64,
    ) -> Result<Self> {
        if num_updates == 0 {
            return Err(input_err!("cannot sample from zero updates"));
        }
        if batch_size == 0 || batch_size > num_updates {
            return Err(input_err!(
                "batch size {batch_size} outside [1, {num_updates}]"
            ));
        }
        Ok(SamplePlan {
            scheme,
            batch_size,
            epochs,
            seed,
            num_updates,
        })
    }

    pub fn num_updates(&self) -> usize {
        self.num_updates
    }

    /// Total number of sampled updates `T = epochs * n`.
    pub fn total_updates(&self) -> u64 {
        (self.epochs * self.num_updates) as u64
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.num_updates.div_ceil(self.batch_size)
    }

    fn epoch_rng(&self, epoch: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(epoch as u64);
        rng
    }

    /// The serial sample sequence of one epoch (update ids in label order).
    pub fn epoch_sequence(&self, epoch: usize) -> Vec<u32> {
        let n = self.num_updates;
        let mut rng = self.epoch_rng(epoch);
        match self.scheme {
            SampleScheme::WithoutReplacement => {
                let mut perm: Vec<u32> = (0..n as u32).collect();
                perm.shuffle(&mut rng);
                perm
            }
            SampleScheme::WithReplacement => {
                (0..n).map(|_| rng.random_range(0..n as u32)).collect()
            }
        }
    }

    /// First label of an epoch.
    pub fn epoch_start(&self, epoch: usize) -> u64 {
        (epoch * self.num_updates) as u64
    }

    /// All batches of an epoch. The last one may be shorter than `batch_size`.
    pub fn epoch_batches(&self, epoch: usize) -> Vec<Batch> {
        let seq = self.epoch_sequence(epoch);
        let start = self.epoch_start(epoch);
        let first_batch = epoch * self.batches_per_epoch();
        seq.chunks(self.batch_size)
            .enumerate()
            .map(|(b, chunk)| {
                let base = start + (b * self.batch_size) as u64;
                Batch {
                    batch_index: first_batch + b,
                    items: chunk
                        .iter()
                        .enumerate()
                        .map(|(k, &update)| Item {
                            label: base + k as u64,
                            update,
                        })
                        .collect(),
                }
            })
            .collect()
    }

    pub fn stream(&self) -> SampleStream {
        SampleStream {
            plan: *self,
            epoch: 0,
            pending: Vec::new().into_iter(),
        }
    }
}

/// One sampled update with its serial-order label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Item {
    pub label: u64,
    pub update: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub batch_index: usize,
    pub items: Vec<Item>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Cursor over the batches of a whole plan. Yields `None` once `T` updates
/// have been produced.
#[derive(Debug)]
pub struct SampleStream {
    plan: SamplePlan,
    epoch: usize,
    pending: std::vec::IntoIter<Batch>,
}

impl SampleStream {
    pub fn next_batch(&mut self) -> Option<Batch> {
        loop {
            if let Some(b) = self.pending.next() {
                return Some(b);
            }
            if self.epoch >= self.plan.epochs {
                return None;
            }
            self.pending = self.plan.epoch_batches(self.epoch).into_iter();
            self.epoch += 1;
        }
    }
}

impl Iterator for SampleStream {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        self.next_batch()
    }
}

/// Batch size below the sampling phase transition: `floor((1 - eps) n / delta)`
/// clamped to `[1, n]`; a conflict-free graph (`delta == 0`) uses `n`.
pub fn prescribed_batch_size(n: usize, delta: usize, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(input_err!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    if delta == 0 {
        return Ok(n.max(1));
    }
    let b = ((1.0 - epsilon) * n as f64 / delta as f64).floor() as usize;
    Ok(b.clamp(1, n.max(1)))
}

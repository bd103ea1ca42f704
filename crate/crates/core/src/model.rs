//! Shared model storage.
//!
//! Coordinates are `f64` values stored as bits in `AtomicU64` and accessed with
//! relaxed ordering. On mainstream targets this compiles to plain loads and
//! stores, so conflict-free execution pays nothing, while racy execution still
//! gets per-word atomicity (no torn reads). Cross-batch visibility comes from
//! the barrier between batches.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

#[derive(Debug)]
pub struct SharedVec {
    data: Box<[AtomicU64]>,
}

impl SharedVec {
    pub fn zeros(len: usize) -> Self {
        Self::filled(len, 0.0)
    }

    pub fn filled(len: usize, value: f64) -> Self {
        SharedVec {
            data: (0..len).map(|_| AtomicU64::new(value.to_bits())).collect(),
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        SharedVec {
            data: values.iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        f64::from_bits(self.data[j].load(Ordering::Relaxed))
    }

    #[inline]
    pub fn set(&self, j: usize, v: f64) {
        self.data[j].store(v.to_bits(), Ordering::Relaxed)
    }

    #[inline]
    pub fn add(&self, j: usize, dv: f64) {
        self.set(j, self.get(j) + dv)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.get(j)).collect()
    }

    pub fn copy_from(&self, values: &[f64]) {
        assert_eq!(values.len(), self.len());
        for (j, &v) in values.iter().enumerate() {
            self.set(j, v);
        }
    }
}

impl Clone for SharedVec {
    fn clone(&self) -> Self {
        Self::from_slice(&self.to_vec())
    }
}

/// Shared 64-bit counters, used for per-variable lazy clocks.
#[derive(Debug)]
pub struct SharedCounters {
    data: Box<[AtomicU64]>,
}

impl SharedCounters {
    pub fn new(len: usize) -> Self {
        SharedCounters {
            data: (0..len).map(|_| AtomicU64::new(0)).collect(),
        }
    }

    #[inline]
    pub fn get(&self, j: usize) -> u64 {
        self.data[j].load(Ordering::Relaxed)
    }

    #[inline]
    pub fn set(&self, j: usize, v: u64) {
        self.data[j].store(v, Ordering::Relaxed)
    }

    pub fn fill(&self, v: u64) {
        for c in self.data.iter() {
            c.store(v, Ordering::Relaxed);
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// The model vector plus the count of applied updates.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub x: SharedVec,
    /// Number of labeled updates applied so far.
    pub applied: u64,
    pub diverged: bool,
}

impl ModelState {
    pub fn zeros(dim: usize) -> Self {
        Self::from_vec(vec![0.0; dim])
    }

    pub fn from_vec(x: Vec<f64>) -> Self {
        ModelState {
            x: SharedVec::from_slice(&x),
            applied: 0,
            diverged: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.x.to_vec()
    }

    pub fn view(&self) -> ModelView<'_> {
        ModelView {
            x: &self.x,
            tracker: None,
            tag: 0,
        }
    }
}

/// Records which worker wrote each coordinate during the current batch.
#[derive(Debug)]
pub struct WriteTracker {
    owner: Box<[AtomicU64]>,
    violations: AtomicUsize,
    first_violation: AtomicU64,
}

const THREAD_BITS: u64 = 16;

impl WriteTracker {
    pub fn new(dim: usize) -> Self {
        WriteTracker {
            owner: (0..dim).map(|_| AtomicU64::new(0)).collect(),
            violations: AtomicUsize::new(0),
            first_violation: AtomicU64::new(u64::MAX),
        }
    }

    /// Tag for `thread` during the batch with global sequence number `batch`.
    pub fn tag(batch: usize, thread: usize) -> u64 {
        ((batch as u64 + 1) << THREAD_BITS) | (thread as u64 + 1)
    }

    #[inline]
    fn record(&self, j: usize, tag: u64) {
        let prev = self.owner[j].swap(tag, Ordering::Relaxed);
        if prev != 0 && prev != tag && prev >> THREAD_BITS == tag >> THREAD_BITS {
            self.violations.fetch_add(1, Ordering::Relaxed);
            let _ = self.first_violation.compare_exchange(
                u64::MAX,
                j as u64,
                Ordering::Relaxed,
                Ordering::Relaxed,
            );
        }
    }

    pub fn violations(&self) -> usize {
        self.violations.load(Ordering::Relaxed)
    }

    pub fn first_violation(&self) -> Option<usize> {
        match self.first_violation.load(Ordering::Relaxed) {
            u64::MAX => None,
            j => Some(j as usize),
        }
    }
}

/// What an update sees of the model: reads and writes go through here so the
/// engine can audit write sets.
#[derive(Clone, Copy)]
pub struct ModelView<'a> {
    x: &'a SharedVec,
    tracker: Option<&'a WriteTracker>,
    tag: u64,
}

impl<'a> ModelView<'a> {
    pub fn tracked(x: &'a SharedVec, tracker: Option<&'a WriteTracker>, tag: u64) -> Self {
        ModelView { x, tracker, tag }
    }

    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        self.x.get(j)
    }

    #[inline]
    pub fn set(&self, j: usize, v: f64) {
        if let Some(t) = self.tracker {
            t.record(j, self.tag);
        }
        self.x.set(j, v)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

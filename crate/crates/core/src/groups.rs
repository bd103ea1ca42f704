//! Conflict groups: connected components of the bipartite subgraph induced by
//! a sampled batch.
//!
//! Two items land in the same group iff they are linked through a chain of
//! shared variables. Different groups therefore touch disjoint variables and
//! can run on different cores without locks. Items are addressed by their
//! batch-local index, which is also their label order.

use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};

use crate::error::{Error, Result};
use crate::graph::UpdateVariableGraph;
use crate::sampler::{Batch, Item};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CcMethod {
    /// Sequential BFS per batch; batches are spread across threads.
    #[default]
    Bfs,
    /// Parallel min-label propagation inside each batch.
    PushLabel,
}

impl std::str::FromStr for CcMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bfs" | "bfs-batches" | "bfs_batches" => Ok(Self::Bfs),
            "push-label" | "push_label" => Ok(Self::PushLabel),
            other => Err(Error::Input(format!("unknown cc method `{other}`"))),
        }
    }
}

/// Partition of one batch into variable-disjoint groups.
///
/// Groups are ordered by their smallest label and items inside a group are in
/// ascending label order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConflictGroups {
    pub batch_index: usize,
    /// Induced edge count `E_u^i` (sum of support sizes over batch items).
    pub induced_edges: usize,
    items: Vec<Item>,
    offsets: Vec<usize>,
}

impl ConflictGroups {
    fn from_labels(batch: &Batch, induced_edges: usize, comp: &[u32]) -> Self {
        // `comp[k]` is the smallest item index of k's component, so bucketing
        // by it and walking k ascending yields both orderings we promise.
        let b = batch.items.len();
        let mut count = vec![0usize; b];
        for &c in comp {
            count[c as usize] += 1;
        }
        let mut start = vec![usize::MAX; b];
        let mut offsets = vec![0usize];
        for k in 0..b {
            if count[k] > 0 {
                start[k] = *offsets.last().unwrap();
                offsets.push(start[k] + count[k]);
            }
        }
        let mut items = vec![Item { label: 0, update: 0 }; b];
        for (k, &c) in comp.iter().enumerate() {
            let slot = &mut start[c as usize];
            items[*slot] = batch.items[k];
            *slot += 1;
        }
        ConflictGroups {
            batch_index: batch.batch_index,
            induced_edges,
            items,
            offsets,
        }
    }

    pub fn num_groups(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn group(&self, g: usize) -> &[Item] {
        &self.items[self.offsets[g]..self.offsets[g + 1]]
    }

    pub fn groups(&self) -> impl Iterator<Item = &[Item]> + '_ {
        (0..self.num_groups()).map(move |g| self.group(g))
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn max_group_size(&self) -> usize {
        self.groups().map(<[Item]>::len).max().unwrap_or(0)
    }

    pub fn mean_group_size(&self) -> f64 {
        if self.num_groups() == 0 {
            0.0
        } else {
            self.items.len() as f64 / self.num_groups() as f64
        }
    }
}

/// Reusable per-thread buffers sized to the variable count.
#[derive(Debug, Clone)]
pub struct CcScratch {
    var_stamp: Vec<u32>,
    var_slot: Vec<u32>,
    stamp: u32,
    slot_vars: Vec<u32>,
    var_items_off: Vec<usize>,
    var_items: Vec<u32>,
    item_seen: Vec<bool>,
    var_seen: Vec<bool>,
    queue: Vec<u32>,
    comp: Vec<u32>,
}

impl CcScratch {
    pub fn new(num_variables: usize) -> Self {
        CcScratch {
            var_stamp: vec![0; num_variables],
            var_slot: vec![0; num_variables],
            stamp: 0,
            slot_vars: Vec::new(),
            var_items_off: Vec::new(),
            var_items: Vec::new(),
            item_seen: Vec::new(),
            var_seen: Vec::new(),
            queue: Vec::new(),
            comp: Vec::new(),
        }
    }

    fn next_stamp(&mut self) -> u32 {
        if self.stamp == u32::MAX {
            self.var_stamp.fill(0);
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stamp
    }

    /// Assigns local slots to the batch's variables and builds the induced
    /// variable-to-items adjacency. Returns the induced edge count.
    fn index_batch(&mut self, g: &UpdateVariableGraph, batch: &Batch) -> usize {
        let stamp = self.next_stamp();
        self.slot_vars.clear();
        let mut edges = 0;
        for it in &batch.items {
            for &v in g.support(it.update as usize) {
                edges += 1;
                let v = v as usize;
                if self.var_stamp[v] != stamp {
                    self.var_stamp[v] = stamp;
                    self.var_slot[v] = self.slot_vars.len() as u32;
                    self.slot_vars.push(v as u32);
                }
            }
        }
        let nv = self.slot_vars.len();
        self.var_items_off.clear();
        self.var_items_off.resize(nv + 1, 0);
        for it in &batch.items {
            for &v in g.support(it.update as usize) {
                self.var_items_off[self.var_slot[v as usize] as usize + 1] += 1;
            }
        }
        for s in 0..nv {
            self.var_items_off[s + 1] += self.var_items_off[s];
        }
        self.var_items.clear();
        self.var_items.resize(edges, 0);
        let mut cursor = self.var_items_off[..nv].to_vec();
        for (k, it) in batch.items.iter().enumerate() {
            for &v in g.support(it.update as usize) {
                let s = self.var_slot[v as usize] as usize;
                self.var_items[cursor[s]] = k as u32;
                cursor[s] += 1;
            }
        }
        edges
    }
}

/// Connected components by BFS over the induced bipartite subgraph. Cost is
/// linear in the induced edge count.
pub fn find_groups_bfs(
    g: &UpdateVariableGraph,
    batch: &Batch,
    scratch: &mut CcScratch,
) -> ConflictGroups {
    let edges = scratch.index_batch(g, batch);
    let b = batch.items.len();
    let nv = scratch.slot_vars.len();
    scratch.item_seen.clear();
    scratch.item_seen.resize(b, false);
    scratch.var_seen.clear();
    scratch.var_seen.resize(nv, false);
    scratch.comp.clear();
    scratch.comp.resize(b, 0);

    for root in 0..b {
        if scratch.item_seen[root] {
            continue;
        }
        scratch.item_seen[root] = true;
        scratch.queue.clear();
        scratch.queue.push(root as u32);
        let mut head = 0;
        while head < scratch.queue.len() {
            let k = scratch.queue[head] as usize;
            head += 1;
            scratch.comp[k] = root as u32;
            for &v in g.support(batch.items[k].update as usize) {
                let s = scratch.var_slot[v as usize] as usize;
                if scratch.var_seen[s] {
                    continue;
                }
                scratch.var_seen[s] = true;
                for &k2 in
                    &scratch.var_items[scratch.var_items_off[s]..scratch.var_items_off[s + 1]]
                {
                    if !scratch.item_seen[k2 as usize] {
                        scratch.item_seen[k2 as usize] = true;
                        scratch.queue.push(k2);
                    }
                }
            }
        }
    }
    ConflictGroups::from_labels(batch, edges, &scratch.comp)
}

/// Connected components by parallel min-label propagation.
///
/// Item labels start at their batch-local index, variable labels at
/// `u32::MAX`. Each round every item takes the minimum over itself and its
/// variables and pushes it back to those variables. Labels only decrease, so
/// concurrent writes cannot undo progress, and the fixed point is the smallest
/// item index of each component.
pub fn find_groups_push_label(
    g: &UpdateVariableGraph,
    batch: &Batch,
    threads: usize,
    scratch: &mut CcScratch,
) -> Result<ConflictGroups> {
    let threads = threads.max(1);
    let edges = scratch.index_batch(g, batch);
    let b = batch.items.len();
    if b == 0 {
        return Ok(ConflictGroups::from_labels(batch, 0, &[]));
    }
    let nv = scratch.slot_vars.len();
    let item_label: Vec<AtomicU32> = (0..b as u32).map(AtomicU32::new).collect();
    let var_label: Vec<AtomicU32> = (0..nv).map(|_| AtomicU32::new(u32::MAX)).collect();
    let var_slot = &scratch.var_slot;

    let sweep = |range: std::ops::Range<usize>, changed: &AtomicBool| {
        let mut local = false;
        for k in range {
            let support = g.support(batch.items[k].update as usize);
            let mut m = item_label[k].load(Ordering::Relaxed);
            for &v in support {
                m = m.min(var_label[var_slot[v as usize] as usize].load(Ordering::Relaxed));
            }
            if m < item_label[k].load(Ordering::Relaxed) {
                item_label[k].store(m, Ordering::Relaxed);
                local = true;
            }
            for &v in support {
                let prev = var_label[var_slot[v as usize] as usize].fetch_min(m, Ordering::Relaxed);
                if prev > m {
                    local = true;
                }
            }
        }
        if local {
            changed.store(true, Ordering::Relaxed);
        }
    };

    let max_rounds = b + 1;
    let chunk = b.div_ceil(threads);
    let mut rounds = 0;
    loop {
        if rounds == max_rounds {
            return Err(Error::Unconverged { rounds });
        }
        rounds += 1;
        let changed = AtomicBool::new(false);
        if threads == 1 {
            sweep(0..b, &changed);
        } else {
            std::thread::scope(|s| {
                for t in 1..threads {
                    let lo = (t * chunk).min(b);
                    let hi = ((t + 1) * chunk).min(b);
                    let changed = &changed;
                    let sweep = &sweep;
                    s.spawn(move || sweep(lo..hi, changed));
                }
                sweep(0..chunk.min(b), &changed);
            });
        }
        if !changed.load(Ordering::Relaxed) {
            break;
        }
    }

    scratch.comp.clear();
    scratch
        .comp
        .extend(item_label.iter().map(|l| l.load(Ordering::Relaxed)));
    let comp = std::mem::take(&mut scratch.comp);
    let out = ConflictGroups::from_labels(batch, edges, &comp);
    scratch.comp = comp;
    Ok(out)
}

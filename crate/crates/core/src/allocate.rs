//! Greedy longest-processing-time allocation of conflict groups to cores.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::graph::UpdateVariableGraph;
use crate::groups::ConflictGroups;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    /// Core of each group, indexed like the input groups.
    pub assignments: Vec<u32>,
    pub core_loads: Vec<u64>,
    /// Groups per core, in the order they were placed.
    pub per_core: Vec<Vec<u32>>,
}

impl Allocation {
    pub fn num_cores(&self) -> usize {
        self.core_loads.len()
    }

    pub fn max_load(&self) -> u64 {
        self.core_loads.iter().copied().max().unwrap_or(0)
    }
}

/// Group cost: sum of the left degrees of its updates (unit cost per edge).
pub fn group_weights(groups: &ConflictGroups, g: &UpdateVariableGraph) -> Vec<u64> {
    groups
        .groups()
        .map(|items| {
            items
                .iter()
                .map(|it| g.left_degree(it.update as usize) as u64)
                .sum()
        })
        .collect()
}

pub fn greedy_allocate(groups: &ConflictGroups, g: &UpdateVariableGraph, cores: usize) -> Allocation {
    greedy_allocate_weights(&group_weights(groups, g), cores)
}

/// Places weights in descending order, each on the currently least-loaded
/// core. Equal weights keep their input order and equal loads go to the lower
/// core id, so the result is a pure function of the inputs.
pub fn greedy_allocate_weights(weights: &[u64], cores: usize) -> Allocation {
    let cores = cores.max(1);
    let mut order: Vec<u32> = (0..weights.len() as u32).collect();
    order.sort_by_key(|&i| (Reverse(weights[i as usize]), i));

    let mut heap: BinaryHeap<Reverse<(u64, u32)>> =
        (0..cores as u32).map(|c| Reverse((0, c))).collect();
    let mut assignments = vec![0u32; weights.len()];
    let mut core_loads = vec![0u64; cores];
    let mut per_core = vec![Vec::new(); cores];
    for i in order {
        let Reverse((load, core)) = heap.pop().expect("at least one core");
        let w = weights[i as usize];
        assignments[i as usize] = core;
        core_loads[core as usize] = load + w;
        per_core[core as usize].push(i);
        heap.push(Reverse((load + w, core)));
    }
    Allocation {
        assignments,
        core_loads,
        per_core,
    }
}

/// `max(w_max, ceil(sum / P))`, a lower bound on the optimal makespan.
pub fn makespan_lower_bound(weights: &[u64], cores: usize) -> u64 {
    let total: u64 = weights.iter().sum();
    let wmax = weights.iter().copied().max().unwrap_or(0);
    wmax.max(total.div_ceil(cores.max(1) as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_instance_is_optimal() {
        let a = greedy_allocate_weights(&[5, 4, 3, 3, 2], 2);
        assert_eq!(a.max_load(), 9);
        assert_eq!(a.core_loads.iter().sum::<u64>(), 17);
    }

    #[test]
    fn single_core_carries_everything() {
        let a = greedy_allocate_weights(&[3, 1, 4, 1, 5], 1);
        assert_eq!(a.core_loads, vec![14]);
    }

    #[test]
    fn more_cores_than_groups() {
        let a = greedy_allocate_weights(&[7, 2, 3], 8);
        assert_eq!(a.max_load(), 7);
    }

    #[test]
    fn zero_groups() {
        let a = greedy_allocate_weights(&[], 4);
        assert!(a.assignments.is_empty());
        assert_eq!(a.max_load(), 0);
    }

    #[test]
    fn ties_are_deterministic() {
        let a = greedy_allocate_weights(&[2, 2, 2, 2], 2);
        assert_eq!(a.assignments, vec![0, 1, 0, 1]);
        assert_eq!(a, greedy_allocate_weights(&[2, 2, 2, 2], 2));
    }
}

//! The update-variable bipartite graph.
//!
//! Left vertices are updates, right vertices are model variables. An edge
//! `(i, j)` means update `i` reads or writes variable `j`. Both directions are
//! stored in compressed jagged form (offsets plus a flat id array) so that
//! traversals stay cache friendly. The conflict graph between updates is never
//! materialized; anything that needs it is computed on demand from the two
//! adjacencies.

use crate::error::{input_err, Result};

/// Compressed jagged adjacency: row `r` is `ids[offsets[r]..offsets[r + 1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jagged {
    offsets: Vec<usize>,
    ids: Vec<u32>,
}

impl Jagged {
    fn from_rows(rows: &[Vec<u32>]) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let total = rows.iter().map(Vec::len).sum();
        let mut ids = Vec::with_capacity(total);
        offsets.push(0);
        for row in rows {
            ids.extend_from_slice(row);
            offsets.push(ids.len());
        }
        Jagged { offsets, ids }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.ids[self.offsets[r]..self.offsets[r + 1]]
    }

    #[inline]
    pub fn row_range(&self, r: usize) -> std::ops::Range<usize> {
        self.offsets[r]..self.offsets[r + 1]
    }

    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn flat(&self) -> &[u32] {
        &self.ids
    }
}

/// Bipartite incidence structure between `n` updates and `d` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateVariableGraph {
    num_variables: usize,
    update_to_vars: Jagged,
    var_to_updates: Jagged,
}

/// Degree statistics used for batch sizing and for the load-balance hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub max_left_degree: usize,
    pub avg_left_degree: f64,
    pub conflict_degree: usize,
    /// `max_left_degree / avg_left_degree <= sqrt(n)`.
    pub ratio_ok: bool,
}

impl UpdateVariableGraph {
    /// Builds the graph from per-update supports.
    ///
    /// Duplicate ids inside one support are dropped; empty supports are legal.
    pub fn build<S: AsRef<[u32]>>(supports: &[S], num_variables: usize) -> Result<Self> {
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(supports.len());
        let mut var_degree = vec![0usize; num_variables];
        for (i, s) in supports.iter().enumerate() {
            let mut row = s.as_ref().to_vec();
            for &v in &row {
                if v as usize >= num_variables {
                    return Err(input_err!(
                        "update {i} references variable {v} but only {num_variables} variables exist"
                    ));
                }
            }
            row.sort_unstable();
            row.dedup();
            for &v in &row {
                var_degree[v as usize] += 1;
            }
            rows.push(row);
        }
        let update_to_vars = Jagged::from_rows(&rows);

        // Counting sort into the inverse adjacency; iterating updates in order
        // keeps every inverse row sorted ascending.
        let mut offsets = Vec::with_capacity(num_variables + 1);
        offsets.push(0usize);
        for deg in &var_degree {
            offsets.push(offsets.last().unwrap() + deg);
        }
        let mut cursor = offsets[..num_variables].to_vec();
        let mut ids = vec![0u32; update_to_vars.ids.len()];
        for (i, row) in rows.iter().enumerate() {
            for &v in row {
                ids[cursor[v as usize]] = i as u32;
                cursor[v as usize] += 1;
            }
        }
        let var_to_updates = Jagged { offsets, ids };

        Ok(UpdateVariableGraph {
            num_variables,
            update_to_vars,
            var_to_updates,
        })
    }

    pub fn num_updates(&self) -> usize {
        self.update_to_vars.num_rows()
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    pub fn num_edges(&self) -> usize {
        self.update_to_vars.ids.len()
    }

    /// Support `S_i` of update `i`, sorted ascending.
    #[inline]
    pub fn support(&self, update: usize) -> &[u32] {
        self.update_to_vars.row(update)
    }

    /// Position range of update `i`'s support inside the flat edge array.
    /// Per-edge payloads (matrix values, stored gradients) index with it.
    #[inline]
    pub fn edge_range(&self, update: usize) -> std::ops::Range<usize> {
        self.update_to_vars.row_range(update)
    }

    /// Updates touching variable `j`, sorted ascending.
    #[inline]
    pub fn updates_of(&self, var: usize) -> &[u32] {
        self.var_to_updates.row(var)
    }

    pub fn left_degree(&self, update: usize) -> usize {
        self.update_to_vars.row_range(update).len()
    }

    pub fn right_degree(&self, var: usize) -> usize {
        self.var_to_updates.row_range(var).len()
    }

    pub fn update_to_vars(&self) -> &Jagged {
        &self.update_to_vars
    }

    pub fn var_to_updates(&self) -> &Jagged {
        &self.var_to_updates
    }

    /// Number of other updates whose support intersects that of `update`.
    pub fn conflict_degree_of(&self, update: usize, seen: &mut [u32], stamp: u32) -> usize {
        let mut count = 0;
        for &v in self.support(update) {
            for &k in self.updates_of(v as usize) {
                if k as usize != update && seen[k as usize] != stamp {
                    seen[k as usize] = stamp;
                    count += 1;
                }
            }
        }
        count
    }

    /// Maximum degree of the (implicit) conflict graph.
    pub fn conflict_degree(&self) -> usize {
        let n = self.num_updates();
        let mut seen = vec![u32::MAX; n];
        (0..n)
            .map(|i| self.conflict_degree_of(i, &mut seen, i as u32))
            .max()
            .unwrap_or(0)
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.num_updates();
        if n == 0 {
            return GraphStats {
                max_left_degree: 0,
                avg_left_degree: 0.0,
                conflict_degree: 0,
                ratio_ok: true,
            };
        }
        let max_left_degree = (0..n).map(|i| self.left_degree(i)).max().unwrap_or(0);
        let avg_left_degree = self.num_edges() as f64 / n as f64;
        let ratio_ok = if avg_left_degree == 0.0 {
            true
        } else {
            max_left_degree as f64 / avg_left_degree <= (n as f64).sqrt()
        };
        GraphStats {
            max_left_degree,
            avg_left_degree,
            conflict_degree: self.conflict_degree(),
            ratio_ok,
        }
    }

    /// Drops every incidence of the given variables, keeping ids stable.
    pub fn without_variables(&self, removed: &[bool]) -> Self {
        let rows: Vec<Vec<u32>> = (0..self.num_updates())
            .map(|i| {
                self.support(i)
                    .iter()
                    .copied()
                    .filter(|&v| !removed[v as usize])
                    .collect()
            })
            .collect();
        Self::build(&rows, self.num_variables).expect("ids already validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> UpdateVariableGraph {
        UpdateVariableGraph::build(&[vec![0, 1], vec![1, 2], vec![3]], 4).unwrap()
    }

    #[test]
    fn toy_counts() {
        let g = toy();
        assert_eq!(g.num_edges(), 5);
        assert_eq!(g.stats().max_left_degree, 2);
        assert_eq!(g.updates_of(1), &[0, 1]);
        assert_eq!(g.conflict_degree(), 1);
        let s = g.stats();
        assert!((s.avg_left_degree - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_supports() {
        let g = UpdateVariableGraph::build(&[vec![], vec![], vec![]], 1).unwrap();
        assert_eq!(g.num_edges(), 0);
        assert_eq!(g.stats().max_left_degree, 0);
        assert_eq!(g.conflict_degree(), 0);
    }

    #[test]
    fn single_shared_variable() {
        let g = UpdateVariableGraph::build(&[vec![0], vec![0], vec![0]], 1).unwrap();
        assert_eq!(g.updates_of(0), &[0, 1, 2]);
        assert_eq!(g.conflict_degree(), 2);
    }

    #[test]
    fn disjoint_supports_have_no_conflicts() {
        let g = UpdateVariableGraph::build(&[vec![0, 1], vec![2], vec![3, 4]], 5).unwrap();
        assert_eq!(g.conflict_degree(), 0);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let err = UpdateVariableGraph::build(&[vec![0, 4]], 4).unwrap_err();
        assert!(matches!(err, crate::Error::Input(_)));
    }

    #[test]
    fn duplicates_are_dropped() {
        let g = UpdateVariableGraph::build(&[vec![2, 0, 2, 0]], 3).unwrap();
        assert_eq!(g.support(0), &[0, 2]);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn single_update_stats() {
        let g = UpdateVariableGraph::build(&[vec![0, 1, 2]], 3).unwrap();
        let s = g.stats();
        assert_eq!(s.conflict_degree, 0);
        assert!(s.ratio_ok);
    }

    #[test]
    fn zero_updates_all_zero() {
        let g = UpdateVariableGraph::build::<Vec<u32>>(&[], 3).unwrap();
        let s = g.stats();
        assert_eq!(s.max_left_degree, 0);
        assert_eq!(s.avg_left_degree, 0.0);
        assert_eq!(s.conflict_degree, 0);
    }
}

//! Datasets: an update-variable graph plus the per-update payload the
//! algorithms need.
//!
//! How supports are derived depends on the task:
//!
//! | payload        | one update per          | support                         |
//! |----------------|-------------------------|---------------------------------|
//! | `Rows`         | matrix row              | nonzero columns of the row      |
//! | `Ratings`      | observed entry `(i, j)` | `{row block i, col block j}`    |
//! | `Cooccurrence` | nonzero count `(w, w')` | `{w, w'}`                       |
//! | `Neighborhoods`| graph vertex `v`        | `{v} ∪ N(v)`                    |

mod filter;
mod formats;
mod spec;
mod synth;

use std::sync::Arc;

pub use filter::{filter_dense_features, FilterReport};
pub use formats::{
    read_edge_list, read_labeled_rows, read_triples, write_edge_list, write_labeled_rows,
    write_triples, EdgeList, LabeledRows, Triples,
};
pub use spec::{adjacency_rows, load, DatasetSpec, GraphUse};
pub use synth::{
    synth_cooccurrence, synth_graph, synth_least_squares, synth_power_law_rows, synth_ratings,
    SynthLeastSquares,
};

use crate::error::{input_err, Result};
use crate::graph::UpdateVariableGraph;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Sparse rows. `values` is aligned with the graph's flat edge array, so
    /// row `i` is `values[graph.edge_range(i)]`; `targets[i]` is `b_i` or the
    /// class label.
    Rows { values: Vec<f64>, targets: Vec<f64> },
    /// Observed matrix entries; variables `0..num_rows` are rows of `U`, the
    /// rest are columns of `V`.
    Ratings {
        num_rows: usize,
        num_cols: usize,
        entries: Vec<(u32, u32, f64)>,
    },
    /// Nonzero co-occurrence counts `A_{w,w'}`.
    Cooccurrence { num_words: usize, pairs: Vec<(u32, u32, f64)> },
    /// Closed neighborhoods of an undirected graph.
    Neighborhoods,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graph: Arc<UpdateVariableGraph>,
    pub payload: Payload,
}

impl Dataset {
    /// Builds a row dataset. Repeated column indices within a row are summed.
    pub fn from_rows(
        name: impl Into<String>,
        rows: Vec<Vec<(u32, f64)>>,
        targets: Vec<f64>,
        num_cols: usize,
    ) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(input_err!("{} rows but {} targets", rows.len(), targets.len()));
        }
        let mut supports = Vec::with_capacity(rows.len());
        let mut values = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            supports.push(merged.iter().map(|e| e.0).collect::<Vec<u32>>());
            values.extend(merged.iter().map(|e| e.1));
        }
        let graph = UpdateVariableGraph::build(&supports, num_cols)?;
        Ok(Dataset {
            name: name.into(),
            graph: Arc::new(graph),
            payload: Payload::Rows { values, targets },
        })
    }

    pub fn from_ratings(
        name: impl Into<String>,
        num_rows: usize,
        num_cols: usize,
        entries: Vec<(u32, u32, f64)>,
    ) -> Result<Self> {
        let mut supports = Vec::with_capacity(entries.len());
        for &(i, j, _) in &entries {
            if i as usize >= num_rows || j as usize >= num_cols {
                return Err(input_err!("rating ({i}, {j}) outside {num_rows} x {num_cols}"));
            }
            supports.push([i, (num_rows + j as usize) as u32]);
        }
        let graph = UpdateVariableGraph::build(&supports, num_rows + num_cols)?;
        Ok(Dataset {
            name: name.into(),
            graph: Arc::new(graph),
            payload: Payload::Ratings {
                num_rows,
                num_cols,
                entries,
            },
        })
    }

    pub fn from_cooccurrence(
        name: impl Into<String>,
        num_words: usize,
        pairs: Vec<(u32, u32, f64)>,
    ) -> Result<Self> {
        let mut supports = Vec::with_capacity(pairs.len());
        for &(w, w2, a) in &pairs {
            if !(a > 0.0) {
                return Err(input_err!("co-occurrence ({w}, {w2}) has non-positive count {a}"));
            }
            supports.push(vec![w, w2]);
        }
        let graph = UpdateVariableGraph::build(&supports, num_words)?;
        Ok(Dataset {
            name: name.into(),
            graph: Arc::new(graph),
            payload: Payload::Cooccurrence { num_words, pairs },
        })
    }

    /// One update per vertex with support `{v} ∪ N(v)`.
    pub fn neighborhoods(name: impl Into<String>, edges: &EdgeList) -> Result<Self> {
        let n = edges.num_vertices;
        let mut supports: Vec<Vec<u32>> = (0..n as u32).map(|v| vec![v]).collect();
        for &(u, v, _) in &edges.edges {
            supports[u as usize].push(v);
            supports[v as usize].push(u);
        }
        let graph = UpdateVariableGraph::build(&supports, n)?;
        Ok(Dataset {
            name: name.into(),
            graph: Arc::new(graph),
            payload: Payload::Neighborhoods,
        })
    }

    pub fn num_updates(&self) -> usize {
        self.graph.num_updates()
    }

    pub fn rows(&self) -> Option<(&[f64], &[f64])> {
        match &self.payload {
            Payload::Rows { values, targets } => Some((values, targets)),
            _ => None,
        }
    }

    /// Row `i` as parallel (columns, values) slices.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (values, _) = self.rows().expect("row dataset");
        (self.graph.support(i), &values[self.graph.edge_range(i)])
    }

    /// Same rows, new targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Self> {
        match &self.payload {
            Payload::Rows { values, .. } => {
                if targets.len() != self.num_updates() {
                    return Err(input_err!("expected {} targets", self.num_updates()));
                }
                Ok(Dataset {
                    name: self.name.clone(),
                    graph: self.graph.clone(),
                    payload: Payload::Rows {
                        values: values.clone(),
                        targets,
                    },
                })
            }
            _ => Err(input_err!("targets only apply to row datasets")),
        }
    }

    /// Same rows scaled to unit l2 norm (empty rows untouched).
    pub fn normalized_rows(&self) -> Result<Self> {
        let (values, targets) = self
            .rows()
            .ok_or_else(|| input_err!("row normalization needs a row dataset"))?;
        let mut out = values.to_vec();
        for i in 0..self.num_updates() {
            let r = self.graph.edge_range(i);
            let norm = out[r.clone()].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                out[r].iter_mut().for_each(|v| *v /= norm);
            }
        }
        Ok(Dataset {
            name: self.name.clone(),
            graph: self.graph.clone(),
            payload: Payload::Rows {
                values: out,
                targets: targets.to_vec(),
            },
        })
    }

    /// Dense `A x` for a row dataset.
    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_updates())
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, v)| v * x[c as usize]).sum()
            })
            .collect()
    }

    /// Writes the dataset in the text format matching its payload.
    pub fn write<W: std::io::Write>(&self, w: W) -> Result<()> {
        match &self.payload {
            Payload::Rows { targets, .. } => {
                let rows = LabeledRows {
                    num_cols: self.graph.num_variables(),
                    labels: targets.clone(),
                    rows: (0..self.num_updates())
                        .map(|i| {
                            let (c, v) = self.row(i);
                            c.iter().copied().zip(v.iter().copied()).collect()
                        })
                        .collect(),
                };
                write_labeled_rows(w, &rows)
            }
            Payload::Ratings {
                num_rows,
                num_cols,
                entries,
            } => write_triples(w, (*num_rows, *num_cols), entries),
            Payload::Cooccurrence { num_words, pairs } => {
                write_triples(w, (*num_words, *num_words), pairs)
            }
            Payload::Neighborhoods => {
                let mut edges = Vec::new();
                for v in 0..self.num_updates() {
                    for &u in self.graph.support(v) {
                        if (u as usize) > v {
                            edges.push((v as u32, u, 1.0));
                        }
                    }
                }
                write_edge_list(
                    w,
                    &EdgeList {
                        num_vertices: self.graph.num_variables(),
                        edges,
                    },
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rating_support_is_two_blocks() {
        let d = Dataset::from_ratings("r", 2, 3, vec![(0, 1, 5.0)]).unwrap();
        assert_eq!(d.graph.support(0), &[0, 3]);
        assert_eq!(d.graph.num_variables(), 5);
    }

    #[test]
    fn rows_merge_duplicate_columns() {
        let d = Dataset::from_rows("x", vec![vec![(2, 1.0), (0, 2.0), (2, 0.5)]], vec![1.0], 3).unwrap();
        assert_eq!(d.row(0), (&[0u32, 2][..], &[2.0, 1.5][..]));
    }

    #[test]
    fn neighborhoods_include_self() {
        let e = EdgeList {
            num_vertices: 3,
            edges: vec![(0, 1, 1.0)],
        };
        let d = Dataset::neighborhoods("g", &e).unwrap();
        assert_eq!(d.graph.support(0), &[0, 1]);
        assert_eq!(d.graph.support(2), &[2]);
    }

    #[test]
    fn zero_count_rejected() {
        assert!(Dataset::from_cooccurrence("c", 2, vec![(0, 1, 0.0)]).is_err());
    }
}

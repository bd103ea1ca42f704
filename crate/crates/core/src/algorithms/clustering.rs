use std::collections::HashMap;
use std::sync::Arc;

use crate::engine::{Scratch, StochasticUpdate};
use crate::graph::UpdateVariableGraph;
use crate::model::{ModelState, ModelView};
use crate::sampler::Item;

/// Greedy pivot clustering. Labels start at `+inf`; sampling an unlabeled
/// vertex `v` sets `x_u = min(x_u, v)` for `u` in `{v} ∪ N(v)`. Sampling a
/// labeled vertex does nothing, which is the same as sampling only among
/// unlabeled ones.
///
/// The graph is the neighborhood graph of a dataset: update `v` has support
/// `{v} ∪ N(v)` and edges are positive, non-edges negative.
pub struct CorrelationClustering {
    graph: Arc<UpdateVariableGraph>,
}

impl CorrelationClustering {
    pub fn new(graph: Arc<UpdateVariableGraph>) -> Self {
        CorrelationClustering { graph }
    }

    pub fn initial_model(&self) -> ModelState {
        ModelState::from_vec(vec![f64::INFINITY; self.graph.num_variables()])
    }

    /// Cluster id per vertex; unlabeled vertices are their own cluster.
    pub fn clusters(model: &ModelState) -> Vec<u64> {
        model
            .to_vec()
            .iter()
            .enumerate()
            .map(|(v, &l)| if l.is_finite() { l as u64 } else { v as u64 })
            .collect()
    }

    /// Disagreements: non-adjacent pairs inside a cluster plus adjacent pairs
    /// split across clusters.
    pub fn disagreements(&self, clusters: &[u64]) -> u64 {
        let g = &self.graph;
        let mut sizes: HashMap<u64, u64> = HashMap::new();
        for &c in clusters {
            *sizes.entry(c).or_default() += 1;
        }
        let (mut inside, mut across) = (0u64, 0u64);
        for v in 0..g.num_updates() {
            for &u in g.support(v) {
                if (u as usize) > v {
                    if clusters[u as usize] == clusters[v] {
                        inside += 1;
                    } else {
                        across += 1;
                    }
                }
            }
        }
        let pairs: u64 = sizes.values().map(|s| s * (s - 1) / 2).sum();
        (pairs - inside) + across
    }
}

impl StochasticUpdate for CorrelationClustering {
    fn name(&self) -> &str {
        "corr-clustering"
    }

    fn apply(&self, item: Item, model: ModelView<'_>, _s: &mut Scratch) {
        let v = item.update as usize;
        if model.get(v).is_finite() {
            return;
        }
        let label = v as f64;
        for &u in self.graph.support(v) {
            if label < model.get(u as usize) {
                model.set(u as usize, label);
            }
        }
    }

    fn objective(&self, model: &ModelState) -> f64 {
        self.disagreements(&Self::clusters(model)) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, EdgeList};

    fn graph(n: usize, edges: &[(u32, u32)]) -> Arc<UpdateVariableGraph> {
        let e = EdgeList {
            num_vertices: n,
            edges: edges.iter().map(|&(a, b)| (a, b, 1.0)).collect(),
        };
        Dataset::neighborhoods("g", &e).unwrap().graph
    }

    #[test]
    fn star_sampled_at_center() {
        let alg = CorrelationClustering::new(graph(5, &[(2, 0), (2, 1), (2, 3), (2, 4)]));
        let m = alg.initial_model();
        alg.apply(Item { label: 0, update: 2 }, m.view(), &mut Scratch::default());
        assert_eq!(m.to_vec(), vec![2.0; 5]);
        assert_eq!(alg.objective(&m), 6.0);
    }

    #[test]
    fn edgeless_graph_gives_singletons() {
        let alg = CorrelationClustering::new(graph(4, &[]));
        let m = alg.initial_model();
        for v in [3, 1, 0, 2] {
            alg.apply(Item { label: 0, update: v }, m.view(), &mut Scratch::default());
        }
        assert_eq!(CorrelationClustering::clusters(&m), vec![0, 1, 2, 3]);
        assert_eq!(alg.objective(&m), 0.0);
    }

    #[test]
    fn labeled_vertex_is_skipped() {
        let alg = CorrelationClustering::new(graph(3, &[(0, 1), (1, 2)]));
        let m = alg.initial_model();
        alg.apply(Item { label: 0, update: 2 }, m.view(), &mut Scratch::default());
        alg.apply(Item { label: 1, update: 1 }, m.view(), &mut Scratch::default());
        assert_eq!(m.to_vec(), vec![f64::INFINITY, 2.0, 2.0]);
    }
}

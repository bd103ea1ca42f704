use std::sync::Arc;

use super::{Dataset, Payload};
use crate::error::{input_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterReport {
    pub removed: usize,
    pub remaining: usize,
}

/// Drops the `ceil(fraction * d)` variables of highest degree, and every
/// incidence on them, from a row dataset. Ties go to the lower id. Variable
/// ids are kept, so removed variables simply become isolated.
pub fn filter_dense_features(data: &Dataset, fraction: f64) -> Result<(Dataset, FilterReport)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(input_err!("filter fraction {fraction} outside [0, 1)"));
    }
    let Payload::Rows { values, targets } = &data.payload else {
        return Err(input_err!("feature filtering applies to row datasets only"));
    };
    let g = &data.graph;
    let d = g.num_variables();
    let k = ((fraction * d as f64).ceil() as usize).min(d);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.right_degree(v)), v));
    let mut removed = vec![false; d];
    for &v in &order[..k] {
        removed[v] = true;
    }

    let mut kept_values = Vec::with_capacity(values.len());
    for i in 0..g.num_updates() {
        for (e, &v) in g.edge_range(i).zip(g.support(i)) {
            if !removed[v as usize] {
                kept_values.push(values[e]);
            }
        }
    }
    let graph = g.without_variables(&removed);
    let filtered = Dataset {
        name: format!("{}+filter={fraction}", data.name),
        graph: Arc::new(graph),
        payload: Payload::Rows {
            values: kept_values,
            targets: targets.clone(),
        },
    };
    Ok((filtered, FilterReport { removed: k, remaining: d - k }))
}

//! Conflict-free parallel execution of sparse stochastic updates.
//!
//! A run samples a stream of updates, cuts it into batches small enough that
//! the conflict graph of each batch shatters into small connected components,
//! and runs the components on different cores without locks. Updates inside a
//! component keep their sampled order, so the parallel result equals the
//! serial one bit for bit.
//!
//! ```
//! use std::sync::Arc;
//! use conflux::{algorithms, data, engine, sampler};
//!
//! let ds = Arc::new(data::synth_least_squares(200, 50, 3, 0.1, 7).unwrap().dataset);
//! let g = ds.graph.clone();
//! let b = sampler::prescribed_batch_size(g.num_updates(), g.conflict_degree(), 0.5).unwrap();
//! let plan = sampler::SamplePlan::new(g.num_updates(), Default::default(), b, 3, 1).unwrap();
//!
//! let run = |mode| {
//!     let mut inst = algorithms::instantiate(algorithms::AlgorithmKind::Saga, ds.clone(), &Default::default()).unwrap();
//!     let cfg = engine::RunConfig::new(4, 0.01);
//!     engine::run(mode, &mut *inst.algorithm, &g, &plan, &mut inst.model, &cfg).unwrap();
//!     inst.model.to_vec()
//! };
//! let serial = run(engine::Mode::Serial);
//! let parallel = run(engine::Mode::Cyclades);
//! assert!(serial.iter().zip(&parallel).all(|(a, b)| a.to_bits() == b.to_bits()));
//! ```

pub mod algorithms;
pub mod allocate;
pub mod data;
pub mod engine;
mod error;
pub mod graph;
pub mod groups;
pub mod model;
pub mod sampler;

pub use allocate::{greedy_allocate, greedy_allocate_weights, makespan_lower_bound, Allocation};
pub use data::{Dataset, DatasetSpec, Payload};
pub use engine::{run, EpochRecord, Mode, RunConfig, RunRecord, StochasticUpdate};
pub use error::{Error, Result};
pub use graph::{GraphStats, UpdateVariableGraph};
pub use groups::{find_groups_bfs, find_groups_push_label, CcMethod, CcScratch, ConflictGroups};
pub use model::ModelState;
pub use sampler::{prescribed_batch_size, Batch, Item, SamplePlan, SampleScheme};

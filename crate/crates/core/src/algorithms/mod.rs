//! Stochastic-update algorithms and a name-based registry.

mod clustering;
mod eigen;
mod lazy;
mod losses;
mod saga;
mod sgd;
mod svrg;

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub use clustering::CorrelationClustering;
pub use eigen::{
    default_shift, gram_mul, power_iteration, rayleigh_quotient, EigenProblem, SvrgDenseLinear,
};
pub use lazy::{lazy_catchup, LazyClock};
pub use losses::{gather, LeastSquares, Logistic, MatrixCompletion, SparseLoss, WordEmbedding};
pub use saga::{Saga, SagaInit};
pub use sgd::Sgd;
pub use svrg::{mean_gradient, SvrgSparse};

use crate::data::{Dataset, Payload};
use crate::engine::StochasticUpdate;
use crate::error::{input_err, Error, Result};
use crate::model::ModelState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    /// Least squares, plain SGD.
    Sgd,
    /// Least squares, l2-regularized SGD with lazy decay.
    WeightedSgd,
    /// Least squares, SAGA.
    Saga,
    /// Least squares, SVRG with sparse gradients.
    Svrg,
    /// Top eigenvector by shift-and-invert with dense-linear SVRG.
    SvrgEigen,
    McSgd,
    McWeightedSgd,
    Word2vec,
    Logistic,
    CorrClustering,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 10] = [
        AlgorithmKind::Sgd,
        AlgorithmKind::WeightedSgd,
        AlgorithmKind::Saga,
        AlgorithmKind::Svrg,
        AlgorithmKind::SvrgEigen,
        AlgorithmKind::McSgd,
        AlgorithmKind::McWeightedSgd,
        AlgorithmKind::Word2vec,
        AlgorithmKind::Logistic,
        AlgorithmKind::CorrClustering,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::Sgd => "sgd",
            AlgorithmKind::WeightedSgd => "weighted-sgd",
            AlgorithmKind::Saga => "saga",
            AlgorithmKind::Svrg => "svrg",
            AlgorithmKind::SvrgEigen => "svrg-eigen",
            AlgorithmKind::McSgd => "mc-sgd",
            AlgorithmKind::McWeightedSgd => "mc-weighted-sgd",
            AlgorithmKind::Word2vec => "word2vec",
            AlgorithmKind::Logistic => "logistic",
            AlgorithmKind::CorrClustering => "corr-clustering",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| input_err!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct AlgorithmParams {
    /// l2 weight `eta` for the weighted variants.
    pub decay: f64,
    /// Block size for completion and embeddings.
    pub rank: usize,
    pub saga_init: SagaInit,
    /// Eigenvector shift; defaults to 1.1 x the power-iteration estimate.
    pub shift: Option<f64>,
    /// Epochs per shift-and-invert outer iteration.
    pub outer_every: usize,
    /// Standard deviation of random factor initializations.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        AlgorithmParams {
            decay: 1e-3,
            rank: 8,
            saga_init: SagaInit::Gradient,
            shift: None,
            outer_every: 10,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

/// An algorithm ready to run together with its starting model.
pub struct Instance {
    pub algorithm: Box<dyn StochasticUpdate + Send>,
    pub model: ModelState,
}

fn random_model(dim: usize, scale: f64, seed: u64) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, scale).map_err(|e| input_err!("init scale {scale}: {e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1417);
    Ok((0..dim).map(|_| normal.sample(&mut rng)).collect())
}

pub fn instantiate(kind: AlgorithmKind, data: Arc<Dataset>, p: &AlgorithmParams) -> Result<Instance> {
    let d = data.graph.num_variables();
    let boxed = |a: Box<dyn StochasticUpdate + Send>, model| Ok(Instance { algorithm: a, model });
    match kind {
        AlgorithmKind::Sgd => boxed(Box::new(Sgd::new(LeastSquares::new(data)?)), ModelState::zeros(d)),
        AlgorithmKind::WeightedSgd => boxed(
            Box::new(Sgd::weighted(LeastSquares::new(data)?, p.decay)),
            ModelState::zeros(d),
        ),
        AlgorithmKind::Saga => boxed(
            Box::new(Saga::new(LeastSquares::new(data)?, p.saga_init)),
            ModelState::zeros(d),
        ),
        AlgorithmKind::Svrg => boxed(Box::new(SvrgSparse::new(LeastSquares::new(data)?)), ModelState::zeros(d)),
        AlgorithmKind::Logistic => boxed(
            Box::new(Sgd::new(Logistic::new(data)?).named("logistic")),
            ModelState::zeros(d),
        ),
        AlgorithmKind::SvrgEigen => {
            let data = Arc::new(data.normalized_rows()?);
            let shift = match p.shift {
                Some(s) => s,
                None => default_shift(&data, p.seed),
            };
            let (alg, model) = SvrgDenseLinear::shift_invert(data, shift, p.outer_every, p.seed)?;
            boxed(Box::new(alg), model)
        }
        AlgorithmKind::McSgd | AlgorithmKind::McWeightedSgd => {
            let loss = MatrixCompletion::new(data, p.rank)?;
            let x0 = random_model(d * p.rank, p.init_scale, p.seed)?;
            let alg = if kind == AlgorithmKind::McSgd {
                Sgd::new(loss).named("mc-sgd")
            } else {
                Sgd::weighted(loss, p.decay).named("mc-weighted-sgd")
            };
            boxed(Box::new(alg), ModelState::from_vec(x0))
        }
        AlgorithmKind::Word2vec => {
            let x0 = random_model(d * p.rank, p.init_scale, p.seed)?;
            let loss = WordEmbedding::new(data, p.rank, &x0)?;
            boxed(Box::new(Sgd::new(loss).named("word2vec")), ModelState::from_vec(x0))
        }
        AlgorithmKind::CorrClustering => {
            if data.payload != Payload::Neighborhoods {
                return Err(input_err!("correlation clustering needs a graph dataset"));
            }
            let alg = CorrelationClustering::new(data.graph.clone());
            let model = alg.initial_model();
            boxed(Box::new(alg), model)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in AlgorithmKind::ALL {
            assert_eq!(k.as_str().parse::<AlgorithmKind>().unwrap(), k);
        }
        assert!("adam".parse::<AlgorithmKind>().is_err());
    }
}

//! Checks shared by the integration tests and the acceptance harness. Each
//! returns the worst observed deviation so callers can assert or report.

use std::sync::Arc;

use conflux::algorithms::{
    default_shift, gather, EigenProblem, LeastSquares, Logistic, MatrixCompletion, Saga, SagaInit, Sgd,
    SparseLoss, SvrgDenseLinear, SvrgSparse, WordEmbedding,
};
use conflux::data::{self, synth_cooccurrence, synth_least_squares, synth_power_law_rows, synth_ratings};
use conflux::engine::{Mode, RunConfig};
use conflux::{ModelState, SamplePlan, SampleScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{eager_saga, eager_svrg, eager_svrg_dense, eager_weighted_sgd, rel_dev, run_mode};

fn normal_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Fourth-order central difference of `f` at `x` along each coordinate.
pub fn finite_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = 1e-3 * x[j].abs().max(1.0);
            let mut at = |t: f64| {
                y[j] = x[j] + t;
                let v = f(&y);
                y[j] = x[j];
                v
            };
            let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
            (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)
        })
        .collect()
}

/// `|g - fd|_inf / max(|g|_inf, |fd|_inf, 1e-8)`.
pub fn grad_error(g: &[f64], fd: &[f64]) -> f64 {
    let num = g.iter().zip(fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let den = g.iter().chain(fd).map(|v| v.abs()).fold(1e-8, f64::max);
    num / den
}

fn sample_check<L: SparseLoss>(loss: &L, points: usize, scale: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = loss.graph();
    let r = loss.block_size();
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let i = rng.random_range(0..g.num_updates());
        let x = normal_vec(&mut rng, g.num_variables() * r, scale);
        let mut xs = Vec::new();
        gather(g, r, i, |k| x[k], &mut xs);
        let mut grad = vec![0.0; xs.len()];
        loss.sample_grad(i, &xs, &mut grad);
        let fd = finite_difference(&|z| loss.sample_loss(i, z), &xs);
        worst = worst.max(grad_error(&grad, &fd));
    }
    worst
}

fn eigen_problem(nodes: usize, seed: u64) -> EigenProblem {
    let edges = data::synth_graph(nodes, 4.0, seed).unwrap();
    let d = data::adjacency_rows("graph".into(), &edges, seed).unwrap().normalized_rows().unwrap();
    let d = Arc::new(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb);
    let b = normal_vec(&mut rng, d.graph.num_variables(), 1.0);
    let lambda = default_shift(&d, seed);
    EigenProblem::new(d, lambda, b).unwrap()
}

/// Worst gradient error per objective over `points` random points each.
pub fn gradient_checks(points: usize, seed: u64) -> Vec<(&'static str, f64)> {
    let ls = Arc::new(synth_least_squares(60, 25, 4, 0.1, seed).unwrap().dataset);
    let lg = Arc::new(synth_power_law_rows(60, 30, 5, 1.1, seed).unwrap());
    let mc = Arc::new(synth_ratings(8, 9, 2, 0.5, seed).unwrap());
    let we = Arc::new(synth_cooccurrence(12, 40, seed).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let we_x0 = normal_vec(&mut rng, 12 * 3, 0.3);
    let we_loss = WordEmbedding::new(we, 3, &we_x0).unwrap();

    let mut out = vec![
        ("least-squares", sample_check(&LeastSquares::new(ls.clone()).unwrap(), points, 1.0, seed)),
        ("logistic", sample_check(&Logistic::new(lg).unwrap(), points, 1.0, seed)),
        ("matrix-completion", sample_check(&MatrixCompletion::new(mc, 3).unwrap(), points, 1.0, seed)),
        ("word-embedding", sample_check(&we_loss, points, 0.3, seed)),
    ];

    // Weighted objective: mean loss plus eta/2 |x|^2, against its full gradient.
    let wsgd = Sgd::weighted(LeastSquares::new(ls).unwrap(), 0.3);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let x = normal_vec(&mut rng, 25, 1.0);
        let f = |z: &[f64]| {
            wsgd.loss().objective(z) + 0.15 * z.iter().map(|v| v * v).sum::<f64>()
        };
        let mut g = conflux::algorithms::mean_gradient(wsgd.loss(), &x);
        for (gj, xj) in g.iter_mut().zip(&x) {
            *gj += 0.3 * xj;
        }
        worst = worst.max(grad_error(&g, &finite_difference(&f, &x)));
    }
    out.push(("weighted-least-squares", worst));

    let p = eigen_problem(30, seed);
    let n = p.num_rows();
    let (mut ws, mut wf) = (0.0f64, 0.0f64);
    for _ in 0..points {
        let x = normal_vec(&mut rng, n, 1.0);
        let i = rng.random_range(0..n);
        ws = ws.max(grad_error(&p.sample_gradient(i, &x), &finite_difference(&|z| p.sample_objective(i, z), &x)));
        wf = wf.max(grad_error(&p.full_gradient(&x), &finite_difference(&|z| p.objective(z), &x)));
    }
    out.push(("eigen-sample", ws));
    out.push(("eigen-full", wf));
    out
}

/// Worst relative deviation of each lazy implementation from its eager
/// dense oracle, plus the drift of the SAGA running average.
pub fn lazy_vs_eager(seeds: std::ops::Range<u64>, epochs: usize) -> Vec<(&'static str, f64)> {
    let mut worst = [0.0f64; 7];
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ls = Arc::new(synth_least_squares(120, 40, 3, 0.1, seed).unwrap().dataset);
        let n = ls.num_updates();
        let scheme = if seed % 2 == 0 { SampleScheme::WithoutReplacement } else { SampleScheme::WithReplacement };
        let plan = SamplePlan::new(n, scheme, 15, epochs, seed).unwrap();
        let x0 = normal_vec(&mut rng, 40, 1.0);
        let loss = || LeastSquares::new(ls.clone()).unwrap();
        let cfg = |gamma| RunConfig::new(1, gamma);

        // Weighted SGD, scalar blocks.
        let mut alg = Sgd::weighted(loss(), 0.5);
        let got = run_mode(Mode::Serial, &mut alg, &ls.graph, &plan, ModelState::from_vec(x0.clone()), &cfg(0.05));
        let want = eager_weighted_sgd(&loss(), 0.5, 0.05, &plan, &x0);
        worst[0] = worst[0].max(rel_dev(&got, &want));

        // Weighted SGD, rank-3 blocks.
        let mc = Arc::new(synth_ratings(5, 6, 2, 0.6, seed).unwrap());
        let mc_plan = SamplePlan::new(mc.num_updates(), scheme, 4, epochs, seed).unwrap();
        let mc_x0 = normal_vec(&mut rng, 11 * 3, 0.5);
        let mc_loss = || MatrixCompletion::new(mc.clone(), 3).unwrap();
        let mut alg = Sgd::weighted(mc_loss(), 0.5);
        let step = 0.02 / mc.num_updates() as f64;
        let got = run_mode(Mode::Serial, &mut alg, &mc.graph, &mc_plan, ModelState::from_vec(mc_x0.clone()), &cfg(step));
        let want = eager_weighted_sgd(&mc_loss(), 0.5, step, &mc_plan, &mc_x0);
        worst[1] = worst[1].max(rel_dev(&got, &want));

        for (slot, init) in [(2, SagaInit::Gradient), (3, SagaInit::Zeros)] {
            let mut alg = Saga::new(loss(), init);
            let got = run_mode(Mode::Serial, &mut alg, &ls.graph, &plan, ModelState::from_vec(x0.clone()), &cfg(0.02));
            let want = eager_saga(&loss(), 0.02, &plan, &x0, init == SagaInit::Zeros);
            worst[slot] = worst[slot].max(rel_dev(&got, &want));
            worst[4] = worst[4].max(rel_dev(&alg.running_average(), &alg.recomputed_average()));
        }

        let mut alg = SvrgSparse::new(loss());
        let got = run_mode(Mode::Serial, &mut alg, &ls.graph, &plan, ModelState::from_vec(x0.clone()), &cfg(0.02));
        let want = eager_svrg(&loss(), 0.02, &plan, &x0);
        worst[5] = worst[5].max(rel_dev(&got, &want));

        let p = eigen_problem(40, seed);
        let pn = p.num_rows();
        let p_plan = SamplePlan::new(pn, scheme, 8, epochs, seed).unwrap();
        let p_x0 = normal_vec(&mut rng, pn, 1.0);
        let gamma = 0.05 / (pn as f64 * p.lambda);
        let want = eager_svrg_dense(&p, gamma, &p_plan, &p_x0);
        let g = p.data().graph.clone();
        let mut alg = SvrgDenseLinear::new(p);
        let got = run_mode(Mode::Serial, &mut alg, &g, &p_plan, ModelState::from_vec(p_x0), &cfg(gamma));
        worst[6] = worst[6].max(rel_dev(&got, &want));
    }
    vec![
        ("weighted-sgd", worst[0]),
        ("weighted-sgd-blocks", worst[1]),
        ("saga", worst[2]),
        ("saga-zero-init", worst[3]),
        ("saga-running-average", worst[4]),
        ("svrg", worst[5]),
        ("svrg-dense-linear", worst[6]),
    ]
}

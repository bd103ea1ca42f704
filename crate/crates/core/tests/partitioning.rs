mod common;

use conflux::allocate::{greedy_allocate_weights, makespan_lower_bound};
use conflux::data::synth_least_squares;
use conflux::graph::UpdateVariableGraph;
use conflux::groups::{find_groups_bfs, find_groups_push_label, CcScratch};
use conflux::sampler::{SamplePlan, SampleScheme};
use proptest::prelude::*;

use common::{as_positions, brute_conflict_degree, union_find_groups};

fn supports_strategy() -> impl Strategy<Value = (Vec<Vec<u32>>, usize)> {
    (1usize..30).prop_flat_map(|d| {
        (
            prop::collection::vec(prop::collection::vec(0..d as u32, 0..5), 1..60),
            Just(d),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adjacencies_mirror_each_other((supports, d) in supports_strategy()) {
        let g = UpdateVariableGraph::build(&supports, d).unwrap();
        let mut edges = 0;
        for i in 0..g.num_updates() {
            let s = g.support(i);
            prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
            for &v in s {
                prop_assert!(g.updates_of(v as usize).contains(&(i as u32)));
            }
            edges += s.len();
        }
        let back: usize = (0..d).map(|v| g.right_degree(v)).sum();
        prop_assert_eq!(edges, back);
        prop_assert_eq!(edges, g.num_edges());
        prop_assert_eq!(g.conflict_degree(), brute_conflict_degree(&supports));
    }

    #[test]
    fn groups_agree_with_union_find(
        (supports, d) in supports_strategy(),
        b in 1usize..40,
        seed in 0u64..1000,
        replace in any::<bool>(),
    ) {
        let g = UpdateVariableGraph::build(&supports, d).unwrap();
        let b = b.min(g.num_updates());
        let scheme = if replace { SampleScheme::WithReplacement } else { SampleScheme::WithoutReplacement };
        let plan = SamplePlan::new(g.num_updates(), scheme, b, 1, seed).unwrap();
        let mut scratch = CcScratch::new(d);
        for batch in plan.epoch_batches(0) {
            let want = union_find_groups(&g, &batch);
            let bfs = find_groups_bfs(&g, &batch, &mut scratch);
            prop_assert_eq!(as_positions(&bfs, &batch), want.clone());
            for threads in [1, 3] {
                let pl = find_groups_push_label(&g, &batch, threads, &mut scratch).unwrap();
                prop_assert_eq!(&pl, &bfs);
            }
            // Different groups never share a variable.
            let mut owner = std::collections::HashMap::new();
            for (gi, gr) in bfs.groups().enumerate() {
                prop_assert!(gr.windows(2).all(|w| w[0].label < w[1].label));
                for it in gr {
                    for &v in g.support(it.update as usize) {
                        let o = *owner.entry(v).or_insert(gi);
                        prop_assert_eq!(o, gi);
                    }
                }
            }
        }
    }

    #[test]
    fn allocation_is_a_valid_assignment(weights in prop::collection::vec(0u64..100, 0..60), cores in 1usize..12) {
        let a = greedy_allocate_weights(&weights, cores);
        prop_assert_eq!(a.assignments.len(), weights.len());
        let mut loads = vec![0u64; cores];
        for (i, &c) in a.assignments.iter().enumerate() {
            loads[c as usize] += weights[i];
            prop_assert!(a.per_core[c as usize].contains(&(i as u32)));
        }
        prop_assert_eq!(&loads, &a.core_loads);
        // Graham's list-scheduling bound holds for any order.
        let lb = makespan_lower_bound(&weights, cores);
        let wmax = weights.iter().copied().max().unwrap_or(0);
        prop_assert!(a.max_load() <= lb + wmax);
    }
}

#[test]
fn conflict_degree_of_generated_data_matches_brute_force() {
    let s = synth_least_squares(300, 120, 3, 0.1, 4).unwrap();
    let g = &s.dataset.graph;
    let supports: Vec<Vec<u32>> = (0..g.num_updates()).map(|i| g.support(i).to_vec()).collect();
    assert_eq!(g.conflict_degree(), brute_conflict_degree(&supports));
}

#[test]
fn toy_batch_stats() {
    let g = UpdateVariableGraph::build(&[vec![0, 1], vec![1, 2], vec![3]], 4).unwrap();
    let plan = SamplePlan::new(3, SampleScheme::WithoutReplacement, 3, 1, 0).unwrap();
    let batch = plan.epoch_batches(0).remove(0);
    let groups = find_groups_bfs(&g, &batch, &mut CcScratch::new(4));
    assert_eq!(groups.num_groups(), 2);
    assert_eq!(groups.max_group_size(), 2);
}

#[test]
fn without_replacement_is_uniform() {
    // Chi-square on first positions over many seeds; 9 degrees of freedom,
    // 0.999 quantile is 27.88.
    let n = 10;
    let trials = 20_000;
    let mut counts = vec![0usize; n];
    for seed in 0..trials {
        let plan = SamplePlan::new(n, SampleScheme::WithoutReplacement, 1, 1, seed as u64).unwrap();
        counts[plan.epoch_sequence(0)[0] as usize] += 1;
    }
    let expect = trials as f64 / n as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    assert!(chi2 < 27.88, "chi2 = {chi2}");
}

#[test]
fn with_replacement_is_uniform() {
    let n = 10;
    let plan = SamplePlan::new(n, SampleScheme::WithReplacement, 1, 2000, 3).unwrap();
    let mut counts = vec![0usize; n];
    for e in 0..plan.epochs {
        for i in plan.epoch_sequence(e) {
            counts[i as usize] += 1;
        }
    }
    let total = (n * plan.epochs) as f64;
    let expect = total / n as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    assert!(chi2 < 27.88, "chi2 = {chi2}");
}

#[test]
fn without_replacement_tail_is_dominated() {
    // For the monotone statistic "largest component", the chance that
    // sampling without replacement exceeds k is at most the chance under
    // independent Bernoulli selection times n, capped at 1.
    let s = synth_least_squares(400, 200, 2, 0.1, 8).unwrap();
    let g = &s.dataset.graph;
    let n = g.num_updates();
    let b = 100;
    let p = b as f64 / n as f64;
    let trials = 200;
    let mut scratch = CcScratch::new(g.num_variables());
    let mut wo = Vec::with_capacity(trials);
    let mut iid = Vec::with_capacity(trials);
    use rand::{Rng, SeedableRng};
    for t in 0..trials {
        let plan = SamplePlan::new(n, SampleScheme::WithoutReplacement, b, 1, t as u64).unwrap();
        let batch = plan.epoch_batches(0).remove(0);
        wo.push(find_groups_bfs(g, &batch, &mut scratch).max_group_size());

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10_000 + t as u64);
        let items: Vec<conflux::Item> = (0..n as u32)
            .filter(|_| rng.random::<f64>() < p)
            .enumerate()
            .map(|(k, u)| conflux::Item { label: k as u64, update: u })
            .collect();
        let bern = conflux::Batch { batch_index: 0, items };
        iid.push(find_groups_bfs(g, &bern, &mut scratch).max_group_size());
    }
    let max_k = *wo.iter().chain(&iid).max().unwrap();
    for k in 0..=max_k {
        let tw = wo.iter().filter(|&&m| m > k).count() as f64 / trials as f64;
        let ti = iid.iter().filter(|&&m| m > k).count() as f64 / trials as f64;
        assert!(tw <= (n as f64 * ti).min(1.0) + 0.05, "k={k}: {tw} vs {ti}");
    }
}

#[test]
fn lower_bound_form_is_not_a_guarantee() {
    // Five equal groups on four cores: any schedule stacks two of them, so
    // even the optimum exceeds 4/3 of max(w_max, ceil(sum / P)).
    let w = [100; 5];
    let a = greedy_allocate_weights(&w, 4);
    let lb = makespan_lower_bound(&w, 4);
    assert_eq!((a.max_load(), lb), (200, 125));
    assert!(3 * a.max_load() > 4 * lb);
}

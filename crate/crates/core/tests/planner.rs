mod common;

use bnmat::elimination::build_elimination_tree;
use bnmat::elimination::select_order;
use bnmat::engine::useful_set;
use bnmat::model::fixtures::survey;
use bnmat::model::DEFAULT_ENTRY_CAP;
use bnmat::planner::{
    benefit, lsa, marginal_benefit, plan_dp, plan_dp_space, plan_exhaustive, plan_greedy, Budget, MaterializationPlan,
};
use bnmat::workload::{base_usefulness_uniform, enumerate_uniform, usefulness_pair};
use common::{annotated_tree, random_subset};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn in_set(n: usize, set: &[usize]) -> Vec<bool> {
    let mut v = vec![false; n];
    for &u in set {
        v[u] = true;
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dp_equals_exhaustive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, profile) = annotated_tree(&mut rng);
        let k = rng.gen_range(0..=5);
        let dp = plan_dp(&tree, k, &profile).unwrap();
        let ex = plan_exhaustive(&tree, Budget::Cardinality(k), &profile).unwrap();
        prop_assert_eq!(dp.benefit, ex.benefit);
        prop_assert_eq!(benefit(&tree, &dp.selected, &profile).unwrap(), dp.benefit);
        let total_w: u64 = tree.internal_nodes().map(|u| tree.node(u).w).sum();
        let space = rng.gen_range(0..=total_w);
        let dp = plan_dp_space(&tree, space, &profile).unwrap();
        let ex = plan_exhaustive(&tree, Budget::Space(space), &profile).unwrap();
        prop_assert_eq!(dp.benefit, ex.benefit);
        prop_assert!(dp.space() <= space);
    }

    #[test]
    fn greedy_within_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, profile) = annotated_tree(&mut rng);
        let k = rng.gen_range(1..=5);
        let g = plan_greedy(&tree, k, &profile).unwrap();
        let dp = plan_dp(&tree, k, &profile).unwrap();
        prop_assert!(g.benefit <= dp.benefit);
        prop_assert!(g.benefit >= (1.0 - (-1.0f64).exp()) * dp.benefit);
        prop_assert!(g.selected.len() <= k);
    }

    #[test]
    fn closed_form_marginal_benefit(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, profile) = annotated_tree(&mut rng);
        for _ in 0..20 {
            let r = random_subset(&mut rng, &tree, 0.4);
            let u = tree.internal_nodes().nth(rng.gen_range(0..tree.internal_nodes().count())).unwrap();
            let mut with = r.clone();
            if !with.contains(&u) {
                with.push(u);
            }
            let direct = benefit(&tree, &with, &profile).unwrap() - benefit(&tree, &r, &profile).unwrap();
            prop_assert!((marginal_benefit(&tree, &r, u, &profile).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_and_submodular(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, profile) = annotated_tree(&mut rng);
        for _ in 0..20 {
            let s = random_subset(&mut rng, &tree, 0.5);
            let r: Vec<usize> = s.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            let rest: Vec<usize> = tree.internal_nodes().filter(|u| !s.contains(u)).collect();
            let b = |set: &[usize]| benefit(&tree, set, &profile).unwrap();
            prop_assert!(b(&s) >= b(&r));
            if let Some(&u) = rest.get(rng.gen_range(0..rest.len().max(1))) {
                let plus = |set: &[usize]| { let mut v = set.to_vec(); v.push(u); v };
                prop_assert!(b(&plus(&r)) - b(&r) >= b(&plus(&s)) - b(&s));
            }
        }
    }
}

#[test]
fn survey_enumeration_pairs_and_lowest_ancestor() {
    let net = survey();
    let tree = build_elimination_tree(&net, &select_order(&net, DEFAULT_ENTRY_CAP).unwrap());
    let sizes = [1, 2, 3, 4, 5];
    let profile = base_usefulness_uniform(&tree, &sizes);
    let queries = enumerate_uniform(net.len(), &sizes);
    let internal: Vec<usize> = tree.internal_nodes().collect();
    for &u in &internal {
        for v in tree.ancestors(u).filter(|&v| tree.node(v).is_selectable()) {
            let p: f64 =
                queries.iter().filter(|(q, _)| useful_set(q, &[u, v], &tree).contains(&u)).map(|(_, w)| w).sum();
            assert!((p - usefulness_pair(u, Some(v), &profile).unwrap()).abs() < 1e-12);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let r = random_subset(&mut rng, &tree, 0.5);
        let set = in_set(tree.len(), &r);
        for (q, _) in &queries {
            let useful = useful_set(q, &r, &tree);
            for &u in &r {
                let pair: Vec<usize> = std::iter::once(u).chain(lsa(&tree, u, &set)).collect();
                assert_eq!(useful.contains(&u), useful_set(q, &pair, &tree).contains(&u));
            }
        }
        let expected: f64 = queries
            .iter()
            .map(|(q, w)| w * useful_set(q, &r, &tree).iter().map(|&u| tree.node(u).total as f64).sum::<f64>())
            .sum();
        assert!((benefit(&tree, &r, &profile).unwrap() - expected).abs() < 1e-9);
    }
}

#[test]
fn zero_budget_plans_are_empty() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (tree, profile) = annotated_tree(&mut rng);
    for plan in [plan_dp(&tree, 0, &profile).unwrap(), plan_greedy(&tree, 0, &profile).unwrap()] {
        assert_eq!(
            plan,
            MaterializationPlan {
                algorithm: plan.algorithm,
                ..MaterializationPlan::empty(&tree, Budget::Cardinality(0))
            }
        );
    }
}

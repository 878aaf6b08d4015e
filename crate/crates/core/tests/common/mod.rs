#![allow(dead_code)]

use std::path::PathBuf;

use bnmat::elimination::{
    build_elimination_tree, elimination_order, EliminationOrder, EliminationTree, Heuristic, NodeId,
};
use bnmat::model::random::{random_network, RandomNetworkSpec};
use bnmat::model::BayesianNetwork;
use bnmat::workload::{random_profile, UsefulnessProfile};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(format!("{name}.bif.gz"))
}

/// Network with at most 10 variables of cardinality at most 4.
pub fn small_network<R: Rng>(rng: &mut R) -> BayesianNetwork {
    let spec = RandomNetworkSpec {
        variables: rng.gen_range(1..=10),
        max_cardinality: 4,
        max_parents: 3,
        edge_probability: rng.gen_range(0.1..0.7),
    };
    random_network(rng, spec)
}

/// A heuristic order or, one time in four, a random permutation.
pub fn some_order<R: Rng>(rng: &mut R, net: &BayesianNetwork) -> EliminationOrder {
    if rng.gen_bool(0.25) {
        let mut o: Vec<usize> = (0..net.len()).collect();
        o.shuffle(rng);
        EliminationOrder::given(net, o).unwrap()
    } else {
        elimination_order(net, *Heuristic::ALL.choose(rng).unwrap())
    }
}

/// Binarized tree with at most 12 internal nodes, random integer costs and
/// sizes, and a random dyadic usefulness profile.
pub fn annotated_tree<R: Rng>(rng: &mut R) -> (EliminationTree, UsefulnessProfile) {
    loop {
        let spec = RandomNetworkSpec {
            variables: rng.gen_range(2..=9),
            max_cardinality: 3,
            max_parents: 3,
            edge_probability: rng.gen_range(0.2..0.8),
        };
        let net = random_network(rng, spec);
        let order = some_order(rng, &net);
        let tree = build_elimination_tree(&net, &order).binarize();
        if tree.internal_nodes().count() > 12 {
            continue;
        }
        let c: Vec<u64> = (0..tree.len()).map(|_| rng.gen_range(1..=64)).collect();
        let w: Vec<u64> = (0..tree.len()).map(|_| rng.gen_range(1..=16)).collect();
        let tree = tree.with_annotations(&c, &w).unwrap();
        let profile = random_profile(&tree, rng);
        return (tree, profile);
    }
}

/// Random subset of the internal nodes, each kept with probability `p`.
pub fn random_subset<R: Rng>(rng: &mut R, tree: &EliminationTree, p: f64) -> Vec<NodeId> {
    tree.internal_nodes().filter(|_| rng.gen_bool(p)).collect()
}

pub fn max_entry_diff(a: &bnmat::model::Factor, b: &bnmat::model::Factor) -> f64 {
    a.max_abs_diff(b).unwrap_or(f64::INFINITY)
}

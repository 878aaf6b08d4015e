// Usefulness of tree nodes under a uniform workload: the closed form next
// to the frequencies of a sampled workload.

use bnmat::elimination::{build_elimination_tree, select_order};
use bnmat::model::DEFAULT_ENTRY_CAP;
use bnmat::parsers::read_network;
use bnmat::workload::{base_usefulness_sampled, base_usefulness_uniform, sample_workload, WorkloadSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest gap between the closed form and the sampled estimate.
pub fn run_example() -> bnmat::Result<f64> {
    let net = read_network(concat!(env!("CARGO_MANIFEST_DIR"), "/data/asia.bif.gz"))?;
    let tree = build_elimination_tree(&net, &select_order(&net, DEFAULT_ENTRY_CAP)?);
    let spec = WorkloadSpec::uniform(vec![1, 2, 3]).with_samples(2000).with_seed(7);
    let exact = base_usefulness_uniform(&tree, &spec.sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let queries = sample_workload(&tree, &spec, &net, &mut rng)?;
    let sampled = base_usefulness_sampled(&tree, &queries);
    let mut gap: f64 = 0.0;
    for u in tree.internal_nodes() {
        println!("node {u:>2}: closed form {:.4}  sampled {:.4}", exact.base(u), sampled.base(u));
        gap = gap.max((exact.base(u) - sampled.base(u)).abs());
    }
    println!("largest gap {gap:.4} over {} queries", queries.len());
    Ok(gap)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

// Builds a lattice of shrunk subnetworks for a workload and routes queries
// to the smallest member that can answer them.

use bnmat::lattice::{build_lattice, map_query};
use bnmat::model::random::random_query;
use bnmat::model::{joint_brute_force, DEFAULT_ENTRY_CAP};
use bnmat::parsers::read_network;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Member count and the largest deviation from full-network answers.
pub fn run_example() -> bnmat::Result<(usize, f64)> {
    let net = read_network(concat!(env!("CARGO_MANIFEST_DIR"), "/data/asia.bif.gz"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sample: Vec<_> = (0..200).map(|i| random_query(&mut rng, &net, 1 + i % 2, 0)).collect();
    let lattice = build_lattice(&net, &sample, &[], 3, DEFAULT_ENTRY_CAP)?;
    for m in &lattice.members {
        println!("member {} vars {:?} pi {:.3} parents {:?}", m.id, m.vars(), m.pi, m.parents);
    }
    let (alloc, plans) = lattice.plan(4)?;
    println!("budget split {:?}, objective {:.1}", alloc.budgets, alloc.objective);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let q = random_query(&mut rng, &net, 2, 1);
        let routed = map_query(&lattice, &q);
        let (_, answer) = lattice.answer(&q, None)?;
        let truth = joint_brute_force(&net, &q)?;
        worst = worst.max(answer.max_abs_diff(&truth).expect("same scope"));
        assert!(lattice.members[routed].vars().len() <= net.len());
    }
    println!("{} plans, largest deviation {worst:.1e}", plans.len());
    Ok((lattice.len(), worst))
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

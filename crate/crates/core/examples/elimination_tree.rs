// Builds the elimination tree of the six-variable survey network and prints
// its node costs.

use bnmat::elimination::{build_elimination_tree, EliminationOrder, EliminationTree};
use bnmat::model::fixtures::{survey, survey_ids::*};

pub fn run_example() -> bnmat::Result<EliminationTree> {
    let net = survey();
    let order = EliminationOrder::given(&net, vec![A, S, T, E, O, R])?;
    let tree = build_elimination_tree(&net, &order);
    tree.check()?;
    println!("{} nodes, height {}, widest fan-in {}", tree.len(), tree.height(), tree.max_children());
    for u in tree.internal_nodes() {
        let node = tree.node(u);
        println!("node {u} eliminates {:?}: c={} U={} w={}", node.kind.var(), node.c, node.total, node.w);
    }
    let binary = tree.binarize();
    println!("binarized: {} nodes", binary.len());
    print!("{}", tree.dump());
    Ok(tree)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

// Chooses nodes to materialize with the exact dynamic program, the greedy
// approximation and a space budget.

use bnmat::elimination::{build_elimination_tree, select_order};
use bnmat::model::DEFAULT_ENTRY_CAP;
use bnmat::parsers::read_network;
use bnmat::planner::{plan_dp, plan_dp_space, plan_greedy};
use bnmat::workload::base_usefulness_uniform;

/// Benefits of the DP and greedy plans at `k = 3`.
pub fn run_example() -> bnmat::Result<(f64, f64)> {
    let net = read_network(concat!(env!("CARGO_MANIFEST_DIR"), "/data/alarm.bif.gz"))?;
    let tree = build_elimination_tree(&net, &select_order(&net, DEFAULT_ENTRY_CAP)?);
    let profile = base_usefulness_uniform(&tree, &[1, 2, 3, 4, 5]);
    let dp = plan_dp(&tree, 3, &profile)?;
    let greedy = plan_greedy(&tree, 3, &profile)?;
    println!("dp     {:?} benefit {:.1}", dp.selected, dp.benefit);
    println!("greedy {:?} benefit {:.1}", greedy.selected, greedy.benefit);
    let space = plan_dp_space(&tree, 500, &profile)?;
    println!("space 500: {:?} stores {} entries, benefit {:.1}", space.selected, space.space(), space.benefit);
    Ok((dp.benefit, greedy.benefit))
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

// Materializes a plan and answers queries with it, comparing answers and
// costs with plain elimination.

use bnmat::elimination::{build_elimination_tree, select_order};
use bnmat::engine::{answer_query, conditional, range};
use bnmat::model::{Query, DEFAULT_ENTRY_CAP};
use bnmat::parsers::read_network;
use bnmat::planner::{materialize, plan_dp, MaterializationStore};
use bnmat::workload::base_usefulness_uniform;

/// Total cost of the queries without and with the store.
pub fn run_example() -> bnmat::Result<(u64, u64)> {
    let net = read_network(concat!(env!("CARGO_MANIFEST_DIR"), "/data/alarm.bif.gz"))?;
    let tree = build_elimination_tree(&net, &select_order(&net, DEFAULT_ENTRY_CAP)?);
    let plan = plan_dp(&tree, 5, &base_usefulness_uniform(&tree, &[1, 2, 3]))?;
    let store = materialize(&plan, &net, &tree)?;
    let empty = MaterializationStore::empty(&tree);
    println!("stored {} tables, {} entries", store.len(), store.entries());
    let id = |name: &str| net.id_of(name).expect("alarm variable");
    let queries = [
        Query::marginal([id("HR")]),
        Query::marginal([id("BP"), id("CO")]),
        Query::new([id("LVFAILURE")], [(id("HISTORY"), 0)]),
    ];
    let (mut plain, mut fast) = (0, 0);
    for q in &queries {
        let a = answer_query(q, &net, &tree, &empty)?;
        let b = answer_query(q, &net, &tree, &store)?;
        let diff = a.table.max_abs_diff(&b.table).expect("same scope");
        println!(
            "{}: cost {} -> {} ({} tables reused), max diff {diff:.1e}",
            q.to_line(&net),
            a.cost_estimated,
            b.cost_estimated,
            b.nodes_skipped.len()
        );
        plain += a.cost_estimated;
        fast += b.cost_estimated;
    }
    let post = conditional(&queries[2], &net, &tree, &store)?;
    println!("Pr(LVFAILURE | HISTORY) = {:?}", post.values());
    let some = range(&Query::marginal([id("HR")]), id("CO"), &[0, 1], &net, &tree, &store)?;
    println!("Pr(HR, CO in {{0,1}}) = {:?}", some.values());
    Ok((plain, fast))
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

// Writes a plan and its materialized tables to text and reads them back.

use bnmat::elimination::{build_elimination_tree, select_order};
use bnmat::model::DEFAULT_ENTRY_CAP;
use bnmat::parsers::read_network;
use bnmat::planner::{materialize, parse_plan, parse_store, plan_greedy, write_plan, write_store};
use bnmat::workload::base_usefulness_uniform;

/// The plan text.
pub fn run_example() -> bnmat::Result<String> {
    let net = read_network(concat!(env!("CARGO_MANIFEST_DIR"), "/data/survey.bif.gz"))?;
    let tree = build_elimination_tree(&net, &select_order(&net, DEFAULT_ENTRY_CAP)?);
    let plan = plan_greedy(&tree, 2, &base_usefulness_uniform(&tree, &[1, 2]))?;
    let text = write_plan(&plan);
    print!("{text}");
    assert_eq!(parse_plan(&text)?.selected, plan.selected);
    let store = materialize(&plan, &net, &tree)?;
    let stored = write_store(&store);
    let back = parse_store(&stored, &tree)?;
    println!("store: {} tables, {} entries, {} bytes of text", back.len(), back.entries(), stored.len());
    Ok(text)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

// Compares the four ordering heuristics on a mid-sized network and shows
// the one the automatic selection keeps.

use bnmat::elimination::{elimination_order, select_order, Heuristic};
use bnmat::model::DEFAULT_ENTRY_CAP;
use bnmat::parsers::read_network;

/// Returns the selected heuristic and its largest join.
pub fn run_example() -> bnmat::Result<(Heuristic, f64)> {
    let net = read_network(concat!(env!("CARGO_MANIFEST_DIR"), "/data/child.bif.gz"))?;
    for h in Heuristic::ALL {
        let o = elimination_order(&net, h);
        println!("{h:>4}: join avg {:>8.1} max {:>8.0}", o.stats.avg, o.stats.max);
    }
    let chosen = select_order(&net, DEFAULT_ENTRY_CAP)?;
    let h = chosen.heuristic.expect("selected orders carry their heuristic");
    println!("selected {h}, first variables: {:?}", &chosen.order[..5]);
    Ok((h, chosen.stats.max))
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

// Calibrates a junction tree and answers queries from clique marginals.

use bnmat::elimination::select_order;
use bnmat::jtree::{build_junction_tree, calibrate, jt_query, JtStats};
use bnmat::model::{joint_brute_force, Query, DEFAULT_ENTRY_CAP};
use bnmat::parsers::read_network;

pub fn run_example() -> bnmat::Result<JtStats> {
    let net = read_network(concat!(env!("CARGO_MANIFEST_DIR"), "/data/asia.bif.gz"))?;
    let order = select_order(&net, DEFAULT_ENTRY_CAP)?;
    let jt = calibrate(&build_junction_tree(&net, &order)?, &net)?;
    jt.check_running_intersection()?;
    let stats = jt.stats();
    println!(
        "{} cliques, largest has {} variables, {} entries, calibration cost {}",
        stats.clique_count, stats.max_clique_size, stats.total_entries, jt.calibration_cost
    );
    for c in &jt.cliques {
        let names: Vec<&str> = c.iter().map(|&v| net.variable(v).name.as_str()).collect();
        println!("  {names:?}");
    }
    let q = Query::marginal([net.id_of("either").expect("asia"), net.id_of("smoke").expect("asia")]);
    let a = jt_query(&jt, &q)?;
    let diff = a.table.max_abs_diff(&joint_brute_force(&net, &q)?).expect("same scope");
    println!("{} from {} cliques, cost {}, max diff {diff:.1e}", q.to_line(&net), a.cliques_used, a.cost);
    Ok(stats)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

// Reads a BIF file, reports its size and round-trips it through the native
// text format.

use bnmat::model::validate_network;
use bnmat::parsers::{network_stats, parse_native, read_network, serialize_native, NetworkStats};

pub fn run_example() -> bnmat::Result<NetworkStats> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/asia.bif.gz");
    let net = read_network(path)?;
    let stats = network_stats(&net);
    println!(
        "asia: {} variables, {} edges, {} parameters, average degree {:.2}",
        stats.node_count, stats.edge_count, stats.parameter_count, stats.avg_degree
    );
    let violations = validate_network(&net);
    println!("violations: {}", violations.len());
    let text = serialize_native(&net);
    let back = parse_native(&text)?;
    assert_eq!(serialize_native(&back), text);
    println!("native round trip: {} bytes", text.len());
    Ok(stats)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

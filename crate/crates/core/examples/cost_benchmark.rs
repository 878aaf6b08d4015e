// Runs a sampled workload with and without a plan and reports model cost,
// wall time and their correlation per query size.

use bnmat::elimination::{build_elimination_tree, select_order};
use bnmat::engine::{bench_csv, bench_queries, summarize, BenchSummary, Measure};
use bnmat::model::DEFAULT_ENTRY_CAP;
use bnmat::parsers::read_network;
use bnmat::planner::{materialize, plan_dp};
use bnmat::workload::{profile_for, sample_workload, WorkloadSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> bnmat::Result<Vec<BenchSummary>> {
    let net = read_network(concat!(env!("CARGO_MANIFEST_DIR"), "/data/alarm.bif.gz"))?;
    let tree = build_elimination_tree(&net, &select_order(&net, DEFAULT_ENTRY_CAP)?);
    let spec = WorkloadSpec::uniform(vec![1, 2, 3]).with_samples(20).with_seed(3);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let profile = profile_for(&tree, &spec, &net, &mut rng)?;
    let plan = plan_dp(&tree, 10, &profile)?;
    let store = materialize(&plan, &net, &tree)?;
    let queries = sample_workload(&tree, &spec, &net, &mut rng)?;
    let records = bench_queries(&queries, &net, &tree, &store, Measure::Both, 3, DEFAULT_ENTRY_CAP)?;
    let rows = summarize(&records);
    print!("{}", bench_csv(&rows));
    Ok(rows)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

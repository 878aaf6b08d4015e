mod common;

use std::path::Path;
use std::process::Command;

use bnmat::cli::{run, Cli};
use bnmat::planner::parse_plan;
use clap::Parser;
use common::data;

fn run_args(args: &[&str]) -> bnmat::Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("bnmat").chain(args.iter().copied())).expect("arguments parse");
    let mut out = Vec::new();
    run(&cli, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_bnmat")).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn survey_tree_has_twelve_nodes() {
    let out = run_args(&["tree-stats", path(&data("survey"))]).unwrap();
    assert!(out.lines().any(|l| l == "nodes 12"));
    let dump = run_args(&["tree-stats", path(&data("survey")), "--dump"]).unwrap();
    assert_eq!(dump.lines().filter(|l| l.starts_with("node ")).count(), 12);
}

#[test]
fn zero_budget_plan_is_empty() {
    let out = run_args(&["plan", path(&data("survey")), "--budget", "k=0"]).unwrap();
    let plan = parse_plan(&out).unwrap();
    assert!(plan.selected.is_empty());
    assert_eq!(plan.benefit, 0.0);
}

#[test]
fn plan_materialize_query_bench() {
    let dir = tempfile::tempdir().unwrap();
    let net = data("alarm");
    let plan = dir.path().join("plan.txt");
    let store = dir.path().join("store.txt");
    let spec = dir.path().join("w.txt");
    std::fs::write(&spec, "scheme=uniform\nsizes=1,2,3\nsamples=10\nseed=4\n").unwrap();
    run_args(&["plan", path(&net), "--budget", "k=5", "--workload", path(&spec), "-o", path(&plan)]).unwrap();
    run_args(&["materialize", path(&net), "--plan", path(&plan), "-o", path(&store)]).unwrap();
    let plain = run_args(&["query", path(&net), "--free", "HR", "--bound", "CO=HIGH"]).unwrap();
    let fast = run_args(&["query", path(&net), "--store", path(&store), "--free", "HR", "--bound", "CO=HIGH"]).unwrap();
    assert!(plain.starts_with("answer scope="));
    let values = |text: &str| -> Vec<f64> {
        let line = text.lines().nth(1).unwrap();
        line.split(" : ").nth(1).unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect()
    };
    let (a, b) = (values(&plain), values(&fast));
    assert_eq!(a.len(), 3);
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    let bench = |seed: &str| {
        run_args(&["--seed", seed, "bench", path(&net), "--plan", path(&plan), "--workload", path(&spec)]).unwrap()
    };
    let a = bench("9");
    assert_ne!(a, bench("10"));
    assert_eq!(a, bench("9"));
    assert!(a.starts_with("r,queries,mean_cost,mean_base_cost,saving_pct,mean_saving_pct,"));
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn order_lattice_and_jt_bench() {
    let out = run_args(&["order", path(&data("asia")), "--heuristic", "mf"]).unwrap();
    assert!(out.starts_with("heuristic mf\n"));
    assert_eq!(out.lines().last().unwrap().split_whitespace().count(), 9);
    let dir = tempfile::tempdir().unwrap();
    let out =
        run_args(&["--seed", "1", "lattice", path(&data("survey")), "--ell", "2", "-o", path(dir.path())]).unwrap();
    assert!(out.starts_with("members "));
    assert!(dir.path().join("manifest.txt").exists() && dir.path().join("plan_0.txt").exists());
    let jt = run_args(&["jt-bench", path(&data("asia"))]).unwrap();
    assert!(jt.starts_with("# cliques=6 "));
    assert_eq!(jt.lines().nth(1), Some("r,queries,mean_jt_cost,mean_ve_cost"));
}

#[test]
fn convert_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let bn = dir.path().join("survey.bn");
    let bif = dir.path().join("survey.bif");
    run_args(&["convert", path(&data("survey")), path(&bn)]).unwrap();
    run_args(&["convert", path(&bn), path(&bif)]).unwrap();
    let a = run_args(&["stats", path(&data("survey"))]).unwrap();
    assert_eq!(a, run_args(&["stats", path(&bif)]).unwrap());
}

#[test]
fn exit_codes() {
    let survey = data("survey");
    assert_eq!(exit_code(&["stats", path(&survey)]), 0);
    assert_eq!(exit_code(&["query", path(&survey), "--free", "ZZ"]), 2);
    assert_eq!(exit_code(&["stats", "/nonexistent/net.bif"]), 5);
    assert_eq!(exit_code(&["--entry-cap", "2", "tree-stats", path(&survey)]), 4);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bif");
    std::fs::write(
        &bad,
        "network x {}\nvariable a { type discrete [ 2 ] { y, n }; }\nprobability ( a ) { table 0.5, 0.7; }\n",
    )
    .unwrap();
    assert_eq!(exit_code(&["stats", path(&bad)]), 3);
}

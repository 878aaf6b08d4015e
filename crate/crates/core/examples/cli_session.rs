// Drives the command-line interface in process: tree statistics and a plan
// for the survey network.

use bnmat::cli::{run, Cli};
use clap::Parser;

/// Captured output of the two commands.
pub fn run_example() -> bnmat::Result<String> {
    let net = concat!(env!("CARGO_MANIFEST_DIR"), "/data/survey.bif.gz");
    let mut out = Vec::new();
    for args in [vec!["bnmat", "tree-stats", net], vec!["bnmat", "plan", net, "--budget", "k=2", "--algo", "greedy"]] {
        let cli = Cli::try_parse_from(args).map_err(|e| bnmat::Error::Contract(e.to_string()))?;
        run(&cli, &mut out)?;
    }
    let text = String::from_utf8(out).expect("utf-8 output");
    print!("{text}");
    Ok(text)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

//! The `bnmat` command-line tool. Every failure becomes one diagnostic line
//! on stderr and an exit code: 2 parse, 3 validation, 4 size limit, 5 io.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::elimination::{
    build_elimination_tree, elimination_order, select_order, EliminationOrder, EliminationTree, Heuristic,
};
use crate::engine::{
    answer_query_capped, bench_csv, bench_queries, conditional, executable, model_records, query_cost, summarize,
    Measure,
};
use crate::error::{Error, Result};
use crate::jtree::{build_junction_tree, calibrate, jt_query};
use crate::lattice::{build_lattice, save_lattice};
use crate::model::{validate_network, BayesianNetwork, Query, DEFAULT_ENTRY_CAP};
use crate::parsers::{network_stats, read_network, read_text, serialize_native, write_bif};
use crate::planner::{
    materialize_capped, parse_plan, parse_store, plan_dp, plan_dp_space, plan_greedy, plan_greedy_space, write_plan,
    write_store, Budget, MaterializationStore,
};
use crate::workload::{profile_for, sample_workload, WorkloadSpec};

#[derive(Debug, Parser)]
#[command(name = "bnmat", version, about = "Variable elimination with workload-aware factor materialization")]
pub struct Cli {
    /// Seed for every sampler; overrides the workload file's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest factor, in entries, any step may build.
    #[arg(long, global = true, env = "BNMAT_ENTRY_CAP")]
    pub entry_cap: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct NetArgs {
    /// Network file: `.bif`, `.bif.gz` or the native format.
    pub network: PathBuf,
    /// Drop variables with neither parents nor children.
    #[arg(long)]
    pub drop_isolated: bool,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// mn, mw, mf, wmf or auto.
    #[arg(long, default_value = "auto")]
    pub heuristic: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a network and write it as native (`.bn`) or BIF (`.bif`).
    Convert { input: PathBuf, output: PathBuf },
    /// Node, edge and parameter counts.
    Stats {
        #[command(flatten)]
        net: NetArgs,
    },
    /// Elimination order and its factor sizes.
    Order {
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Elimination-tree shape.
    TreeStats {
        #[command(flatten)]
        tree: TreeArgs,
        /// Print one line per node.
        #[arg(long)]
        dump: bool,
    },
    /// Choose nodes to materialize.
    Plan {
        #[command(flatten)]
        tree: TreeArgs,
        /// k=<int> or space=<int>.
        #[arg(long)]
        budget: Budget,
        /// dp or greedy.
        #[arg(long, default_value = "dp")]
        algo: String,
        /// Workload spec file; defaults to uniform sizes 1..5.
        #[arg(long)]
        workload: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute the tables of a plan.
    Materialize {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        plan: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Answer one query.
    Query {
        #[command(flatten)]
        tree: TreeArgs,
        /// Store file from `materialize`.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Free variables, comma separated names or ids.
        #[arg(long, default_value = "")]
        free: String,
        /// Bound variables, `var=state` comma separated.
        #[arg(long, default_value = "")]
        bound: String,
        /// Divide by the evidence mass.
        #[arg(long)]
        conditional: bool,
    },
    /// Cost and savings per query size, as CSV.
    Bench {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        workload: Option<PathBuf>,
        /// model, wall or both.
        #[arg(long, default_value = "model")]
        measure: Measure,
        /// Runs per query; the fastest is kept.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a lattice of shrunk subnetworks and split a budget over it.
    Lattice {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        workload: Option<PathBuf>,
        /// Subnetworks to add besides the full network.
        #[arg(long, default_value_t = 4)]
        ell: usize,
        /// k=<int>.
        #[arg(long, default_value = "k=10")]
        budget: Budget,
        /// Directory for the manifest, member networks and plans.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Junction-tree statistics and per-size cost against plain elimination.
    JtBench {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        workload: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bnmat: {}", one_line(&e));
            e.exit_code()
        }
    }
}

fn one_line(e: &Error) -> String {
    e.to_string().replace('\n', "; ")
}

struct Ctx {
    seed: Option<u64>,
    cap: u64,
}

impl Ctx {
    fn workload(&self, path: Option<&Path>) -> Result<WorkloadSpec> {
        let mut spec = match path {
            Some(p) => {
                let mut s = WorkloadSpec::parse(&read_text(p)?)?;
                // a relative log path is relative to the spec file
                if let (Some(log), Some(dir)) = (s.log.as_mut(), p.parent()) {
                    if log.is_relative() {
                        *log = dir.join(&*log);
                    }
                }
                s
            }
            None => WorkloadSpec::default(),
        };
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        Ok(spec)
    }

    fn network(&self, args: &NetArgs) -> Result<BayesianNetwork> {
        let net = read_network(&args.network)?;
        if args.drop_isolated {
            Ok(net.without_isolated()?.0)
        } else {
            Ok(net)
        }
    }

    fn order(&self, net: &BayesianNetwork, heuristic: &str) -> Result<EliminationOrder> {
        if heuristic == "auto" {
            select_order(net, self.cap)
        } else {
            Ok(elimination_order(net, heuristic.parse::<Heuristic>()?))
        }
    }

    fn tree(&self, args: &TreeArgs) -> Result<(BayesianNetwork, EliminationOrder, EliminationTree)> {
        let net = self.network(&args.net)?;
        let order = self.order(&net, &args.heuristic)?;
        let tree = build_elimination_tree(&net, &order);
        Ok((net, order, tree))
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_cli_query(net: &BayesianNetwork, free: &str, bound: &str) -> Result<Query> {
    let line = if bound.trim().is_empty() { format!("free: {free}") } else { format!("free: {free} bound: {bound}") };
    Query::parse(net, &line)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let ctx = Ctx { seed: cli.seed, cap: cli.entry_cap.unwrap_or(DEFAULT_ENTRY_CAP) };
    match &cli.command {
        Command::Convert { input, output } => {
            let net = read_network(input)?;
            let violations = validate_network(&net);
            if !violations.is_empty() {
                return Err(Error::Invalid(violations));
            }
            let name = output.file_name().and_then(|s| s.to_str()).unwrap_or("");
            let text = if name.ends_with(".bif") {
                let stem = name.trim_end_matches(".bif");
                write_bif(&net, if stem.is_empty() { "network" } else { stem })
            } else {
                serialize_native(&net)
            };
            std::fs::write(output, text)?;
            writeln!(out, "wrote {} variables to {}", net.len(), output.display())?;
        }
        Command::Stats { net } => {
            let net = ctx.network(net)?;
            let violations = validate_network(&net);
            if !violations.is_empty() {
                return Err(Error::Invalid(violations));
            }
            let s = network_stats(&net);
            writeln!(out, "nodes {}", s.node_count)?;
            writeln!(out, "edges {}", s.edge_count)?;
            writeln!(out, "parameters {}", s.parameter_count)?;
            writeln!(out, "avg_degree {:.4}", s.avg_degree)?;
        }
        Command::Order { tree } => {
            let net = ctx.network(&tree.net)?;
            let order = ctx.order(&net, &tree.heuristic)?;
            let h = order.heuristic.map_or("given", Heuristic::short_name);
            writeln!(out, "heuristic {h}")?;
            let st = &order.stats;
            writeln!(out, "join avg {:.1} max {:.0}", st.avg, st.max)?;
            writeln!(out, "created avg {:.1} max {:.0}", st.created_avg, st.created_max)?;
            let names: Vec<&str> = order.order.iter().map(|&v| net.variable(v).name.as_str()).collect();
            writeln!(out, "order {}", names.join(" "))?;
        }
        Command::TreeStats { tree, dump } => {
            let (_, order, t) = ctx.tree(tree)?;
            writeln!(out, "heuristic {}", order.heuristic.map_or("given", Heuristic::short_name))?;
            writeln!(out, "nodes {}", t.real_node_count())?;
            writeln!(out, "height {}", t.height())?;
            writeln!(out, "max_children {}", t.max_children())?;
            writeln!(out, "total_cost {}", t.node(t.root()).total)?;
            if *dump {
                out.write_all(t.dump().as_bytes())?;
            }
        }
        Command::Plan { tree, budget, algo, workload, output } => {
            let (net, _, t) = ctx.tree(tree)?;
            let spec = ctx.workload(workload.as_deref())?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let profile = profile_for(&t, &spec, &net, &mut rng)?;
            let plan = match (algo.as_str(), *budget) {
                ("dp", Budget::Cardinality(k)) => plan_dp(&t, k, &profile)?,
                ("dp", Budget::Space(k)) => plan_dp_space(&t, k, &profile)?,
                ("greedy", Budget::Cardinality(k)) => plan_greedy(&t, k, &profile)?,
                ("greedy", Budget::Space(k)) => plan_greedy_space(&t, k, &profile)?,
                (other, _) => return Err(Error::contract(format!("algorithm must be dp or greedy, got `{other}`"))),
            };
            emit(out, output.as_deref(), &write_plan(&plan))?;
        }
        Command::Materialize { tree, plan, output } => {
            let (net, _, t) = ctx.tree(tree)?;
            let plan = parse_plan(&read_text(plan)?)?;
            let store = materialize_capped(&plan, &net, &t, ctx.cap)?;
            emit(out, output.as_deref(), &write_store(&store))?;
        }
        Command::Query { tree, store, free, bound, conditional: cond } => {
            let (net, _, t) = ctx.tree(tree)?;
            let store = match store {
                Some(p) => parse_store(&read_text(p)?, &t)?,
                None => MaterializationStore::empty(&t),
            };
            let q = parse_cli_query(&net, free, bound)?;
            let ans = answer_query_capped(&q, &net, &t, &store, ctx.cap)?;
            out.write_all(ans.dump().as_bytes())?;
            writeln!(out, "# cost {} skipped {:?}", ans.cost_estimated, ans.nodes_skipped)?;
            if *cond {
                let c = conditional(&q, &net, &t, &store)?;
                out.write_all(crate::engine::factor_line("conditional", &c).as_bytes())?;
            }
        }
        Command::Bench { tree, plan, workload, measure, repeats, output } => {
            let (net, _, t) = ctx.tree(tree)?;
            let plan = parse_plan(&read_text(plan)?)?;
            if plan.tree_hash != t.fingerprint() {
                return Err(Error::contract("plan was made for a different elimination tree"));
            }
            let spec = ctx.workload(workload.as_deref())?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let queries = sample_workload(&t, &spec, &net, &mut rng)?;
            let (records, dropped) = if *measure == Measure::Model {
                (model_records(&queries, &net, &t, &plan.selected), 0)
            } else {
                let store = materialize_capped(&plan, &net, &t, ctx.cap)?;
                let run = executable(&queries, &net, &t, ctx.cap);
                let dropped = queries.len() - run.len();
                (bench_queries(&run, &net, &t, &store, *measure, *repeats, ctx.cap)?, dropped)
            };
            if dropped > 0 {
                eprintln!("bnmat: skipped {dropped} queries whose joins exceed {} entries", ctx.cap);
            }
            emit(out, output.as_deref(), &bench_csv(&summarize(&records)))?;
        }
        Command::Lattice { net, workload, ell, budget, output } => {
            let Budget::Cardinality(k) = *budget else {
                return Err(Error::contract("lattice budgets are cardinality budgets (k=<int>)"));
            };
            let net = ctx.network(net)?;
            let full = build_elimination_tree(&net, &select_order(&net, ctx.cap)?);
            let spec = ctx.workload(workload.as_deref())?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let sample = sample_workload(&full, &spec, &net, &mut rng)?;
            let fresh = sample_workload(&full, &spec, &net, &mut rng)?;
            let lattice = build_lattice(&net, &sample, &fresh, *ell, ctx.cap)?;
            let (alloc, plans) = lattice.plan(k)?;
            save_lattice(&lattice, output)?;
            for (m, p) in lattice.members.iter().zip(&plans) {
                std::fs::write(output.join(format!("plan_{}.txt", m.id)), write_plan(p))?;
            }
            writeln!(out, "members {}", lattice.len())?;
            for (m, ki) in lattice.members.iter().zip(&alloc.budgets) {
                writeln!(
                    out,
                    "member {} vars {} params {} pi {:.4} k {ki}",
                    m.id,
                    m.vars().len(),
                    m.parameter_count(),
                    m.pi
                )?;
            }
            writeln!(out, "objective {}", alloc.objective)?;
            writeln!(out, "expected_parameters {:.1}", lattice.expected_parameters(&fresh))?;
        }
        Command::JtBench { tree, workload, output } => {
            let (net, order, t) = ctx.tree(tree)?;
            let jt = calibrate(&build_junction_tree(&net, &order)?, &net)?;
            let st = jt.stats();
            let spec = ctx.workload(workload.as_deref())?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let queries = sample_workload(&t, &spec, &net, &mut rng)?;
            let mut by_r: std::collections::BTreeMap<usize, (usize, f64, f64)> = Default::default();
            for q in &queries {
                let jc = jt_query(&jt, q)?.cost as f64;
                let vc = query_cost(q, &net, &t, &[]) as f64;
                let e = by_r.entry(q.free.len()).or_default();
                *e = (e.0 + 1, e.1 + jc, e.2 + vc);
            }
            let mut csv = format!(
                "# cliques={} max_clique={} entries={} calibration_cost={}\nr,queries,mean_jt_cost,mean_ve_cost\n",
                st.clique_count, st.max_clique_size, st.total_entries, jt.calibration_cost
            );
            for (r, (n, jc, vc)) in by_r {
                csv.push_str(&format!("{r},{n},{:.3},{:.3}\n", jc / n as f64, vc / n as f64));
            }
            emit(out, output.as_deref(), &csv)?;
        }
    }
    Ok(())
}

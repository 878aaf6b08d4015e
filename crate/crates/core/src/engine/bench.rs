use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::elimination::{EliminationTree, NodeId};
use crate::engine::{answer_query_capped, query_cost, query_peak};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Query};
use crate::planner::MaterializationStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Cost model only; nothing is executed.
    Model,
    /// Executes every query and records wall time.
    Wall,
    Both,
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(Measure::Model),
            "wall" => Ok(Measure::Wall),
            "both" => Ok(Measure::Both),
            _ => Err(Error::contract(format!("measure must be model, wall or both, got `{s}`"))),
        }
    }
}

/// One query evaluated with and without the store.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    /// Number of free variables.
    pub r: usize,
    pub cost: u64,
    pub base_cost: u64,
    pub wall: Option<Duration>,
    pub base_wall: Option<Duration>,
}

/// Per-size aggregate, one CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub r: usize,
    pub queries: usize,
    pub mean_cost: f64,
    pub mean_base_cost: f64,
    /// `100 × (1 − Σ cost / Σ base_cost)`.
    pub saving_pct: f64,
    /// Mean over queries of `100 × (1 − cost / base_cost)`.
    pub mean_saving_pct: f64,
    pub mean_wall_ns: Option<f64>,
    pub mean_base_wall_ns: Option<f64>,
    /// Correlation of model cost and wall time over both runs of every query.
    pub rho: Option<f64>,
}

fn timed(
    q: &Query,
    net: &BayesianNetwork,
    tree: &EliminationTree,
    store: &MaterializationStore,
    repeats: usize,
    cap: u64,
) -> Result<(u64, Duration)> {
    let mut best = Duration::MAX;
    let mut cost = 0;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let a = answer_query_capped(q, net, tree, store, cap)?;
        best = best.min(start.elapsed());
        cost = a.cost_estimated;
    }
    Ok((cost, best))
}

/// Model costs with plan `selected` and with no plan; nothing is executed.
pub fn model_records(
    queries: &[Query],
    net: &BayesianNetwork,
    tree: &EliminationTree,
    selected: &[NodeId],
) -> Vec<BenchRecord> {
    queries
        .iter()
        .map(|q| BenchRecord {
            r: q.free.len(),
            cost: query_cost(q, net, tree, selected),
            base_cost: query_cost(q, net, tree, &[]),
            wall: None,
            base_wall: None,
        })
        .collect()
}

/// Evaluates every query against `store` and against no store. Wall times
/// are the minimum over `repeats` runs. Call [`executable`] first to drop
/// queries whose joins would exceed the cap.
pub fn bench_queries(
    queries: &[Query],
    net: &BayesianNetwork,
    tree: &EliminationTree,
    store: &MaterializationStore,
    measure: Measure,
    repeats: usize,
    cap: u64,
) -> Result<Vec<BenchRecord>> {
    if measure == Measure::Model {
        return Ok(model_records(queries, net, tree, &store.selected()));
    }
    let empty = MaterializationStore::empty(tree);
    queries
        .iter()
        .map(|q| {
            let r = q.free.len();
            let (cost, wall) = timed(q, net, tree, store, repeats, cap)?;
            let (base_cost, base_wall) = timed(q, net, tree, &empty, repeats, cap)?;
            Ok(BenchRecord { r, cost, base_cost, wall: Some(wall), base_wall: Some(base_wall) })
        })
        .collect()
}

/// Queries whose largest join without any plan fits in `cap` entries.
pub fn executable(queries: &[Query], net: &BayesianNetwork, tree: &EliminationTree, cap: u64) -> Vec<Query> {
    queries.iter().filter(|q| query_peak(q, net, tree, &[]) <= cap).cloned().collect()
}

/// Sample Pearson correlation; `None` when either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Correlation of model cost with wall time over both runs of each record.
pub fn cost_time_correlation(records: &[BenchRecord]) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in records {
        for (c, w) in [(rec.cost, rec.wall), (rec.base_cost, rec.base_wall)] {
            if let Some(w) = w {
                xs.push(c as f64);
                ys.push(w.as_nanos() as f64);
            }
        }
    }
    pearson(&xs, &ys)
}

fn summary(r: usize, recs: &[&BenchRecord]) -> BenchSummary {
    let n = recs.len() as f64;
    let cost: f64 = recs.iter().map(|x| x.cost as f64).sum();
    let base: f64 = recs.iter().map(|x| x.base_cost as f64).sum();
    let mean_ns = |f: fn(&BenchRecord) -> Option<Duration>| -> Option<f64> {
        let v: Option<Vec<f64>> = recs.iter().map(|x| f(x).map(|d| d.as_nanos() as f64)).collect();
        v.map(|v| v.iter().sum::<f64>() / n)
    };
    let per_query: f64 = recs
        .iter()
        .map(|x| if x.base_cost > 0 { 100.0 * (1.0 - x.cost as f64 / x.base_cost as f64) } else { 0.0 })
        .sum();
    let owned: Vec<BenchRecord> = recs.iter().map(|&x| x.clone()).collect();
    BenchSummary {
        r,
        queries: recs.len(),
        mean_cost: cost / n,
        mean_base_cost: base / n,
        saving_pct: if base > 0.0 { 100.0 * (1.0 - cost / base) } else { 0.0 },
        mean_saving_pct: per_query / n,
        mean_wall_ns: mean_ns(|x| x.wall),
        mean_base_wall_ns: mean_ns(|x| x.base_wall),
        rho: cost_time_correlation(&owned),
    }
}

/// One summary per query size, ascending, followed by one over all sizes
/// with `r = 0`.
pub fn summarize(records: &[BenchRecord]) -> Vec<BenchSummary> {
    let mut by_r: BTreeMap<usize, Vec<&BenchRecord>> = BTreeMap::new();
    for rec in records {
        by_r.entry(rec.r).or_default().push(rec);
    }
    let mut out: Vec<BenchSummary> = by_r.iter().map(|(&r, recs)| summary(r, recs)).collect();
    if !records.is_empty() {
        out.push(summary(0, &records.iter().collect::<Vec<_>>()));
    }
    out
}

/// CSV with a header row; the overall row is labelled `all`.
pub fn bench_csv(summaries: &[BenchSummary]) -> String {
    let opt = |x: Option<f64>, prec: usize| x.map_or(String::new(), |v| format!("{v:.prec$}"));
    let mut s = String::from(
        "r,queries,mean_cost,mean_base_cost,saving_pct,mean_saving_pct,mean_wall_ns,mean_base_wall_ns,pearson_rho\n",
    );
    for row in summaries {
        let r = if row.r == 0 { "all".to_string() } else { row.r.to_string() };
        let _ = writeln!(
            s,
            "{r},{},{:.3},{:.3},{:.3},{:.3},{},{},{}",
            row.queries,
            row.mean_cost,
            row.mean_base_cost,
            row.saving_pct,
            row.mean_saving_pct,
            opt(row.mean_wall_ns, 0),
            opt(row.mean_base_wall_ns, 0),
            opt(row.rho, 4)
        );
    }
    s
}

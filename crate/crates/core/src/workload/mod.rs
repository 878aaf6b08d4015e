//! Query workloads and the per-node usefulness probabilities they induce.
//!
//! A node `u` can serve a query when every variable eliminated below it is
//! summed out, `vars(u) ⊆ Z_q`. `base(u)` is the probability of that event;
//! the probability that `u` serves a query when `v` is the nearest selected
//! ancestor is `base(u) - base(v)`.

mod spec;

pub use spec::{Scheme, WorkloadSpec};

use rand::seq::index::sample;
use rand::Rng;

use crate::elimination::{EliminationTree, NodeId, NodeKind};
use crate::error::{Error, Result};
use crate::model::{Query, VarId};

/// `base[u]`: probability that node `u` alone would serve a random query.
#[derive(Debug, Clone, PartialEq)]
pub struct UsefulnessProfile {
    pub base: Vec<f64>,
}

impl UsefulnessProfile {
    pub fn base(&self, u: NodeId) -> f64 {
        self.base[u]
    }

    /// Checks `base(u) >= base(parent(u))` on every edge.
    pub fn check_monotone(&self, tree: &EliminationTree) -> Result<()> {
        for u in tree.nodes() {
            if let Some(p) = u.parent {
                if self.base[u.id] < self.base[p] {
                    return Err(Error::Invariant(format!(
                        "usefulness of node {} ({}) below its parent {} ({})",
                        u.id, self.base[u.id], p, self.base[p]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `C(n - m, r) / C(n, r)`, zero when `r > n - m`.
fn avoid_probability(n: usize, m: usize, r: usize) -> f64 {
    if r > n - m {
        return 0.0;
    }
    (0..r).map(|i| (n - m - i) as f64 / (n - i) as f64).product()
}

/// Closed form for the uniform scheme with no bound variables: the mean over
/// sizes `r` of `C(n - m, r) / C(n, r)` where `m = |vars(u)|`.
pub fn base_usefulness_uniform(tree: &EliminationTree, sizes: &[usize]) -> UsefulnessProfile {
    let n = tree.variable_count();
    let base = tree
        .nodes()
        .iter()
        .map(|u| sizes.iter().map(|&r| avoid_probability(n, u.vars.len(), r)).sum::<f64>() / sizes.len() as f64)
        .collect();
    UsefulnessProfile { base }
}

/// Relative frequency of `vars(u) ⊆ Z_q` over the sample.
pub fn base_usefulness_sampled(tree: &EliminationTree, queries: &[Query]) -> UsefulnessProfile {
    let counts = useful_counts(tree, queries);
    let total = queries.len().max(1) as f64;
    UsefulnessProfile { base: counts.into_iter().map(|c| c as f64 / total).collect() }
}

/// Per node, the number of queries whose summed-out set covers `vars(u)`.
pub fn useful_counts(tree: &EliminationTree, queries: &[Query]) -> Vec<u64> {
    let mut counts = vec![0u64; tree.len()];
    let mut blocked = vec![usize::MAX; tree.len()];
    for (qi, q) in queries.iter().enumerate() {
        // u fails exactly when it is the elimination node of a mentioned
        // variable or one of its ancestors
        for v in q.mentioned() {
            let mut u = Some(tree.elim_node(v));
            while let Some(x) = u {
                if blocked[x] == qi {
                    break;
                }
                blocked[x] = qi;
                u = tree.node(x).parent;
            }
        }
        for (u, c) in counts.iter_mut().enumerate() {
            if blocked[u] != qi {
                *c += 1;
            }
        }
    }
    counts
}

/// Pairwise usefulness: `base(u) - base(v)`, with `v = None` standing
/// for "no selected ancestor".
pub fn usefulness_pair(u: NodeId, v: Option<NodeId>, profile: &UsefulnessProfile) -> Result<f64> {
    let p = profile.base[u] - v.map_or(0.0, |v| profile.base[v]);
    if p < 0.0 {
        return Err(Error::Invariant(format!("negative usefulness {p} for node {u} under ancestor {v:?}")));
    }
    Ok(p)
}

/// 1-based level of each variable's elimination node, counted upward from the
/// deepest internal node, so the root has the largest level.
pub fn variable_levels(tree: &EliminationTree) -> Vec<usize> {
    let n = tree.variable_count();
    let internal_depth =
        |u: NodeId| tree.ancestors(u).filter(|&a| matches!(tree.node(a).kind, NodeKind::Internal(_))).count();
    let depths: Vec<usize> = (0..n).map(|v| internal_depth(tree.elim_node(v))).collect();
    let deepest = depths.iter().copied().max().unwrap_or(0);
    depths.into_iter().map(|d| deepest - d + 1).collect()
}

fn uniform_query<R: Rng + ?Sized>(rng: &mut R, n: usize, r: usize) -> Query {
    Query::marginal(sample(rng, n, r))
}

/// Draws `r` distinct variables, each draw proportional to the remaining
/// weights.
fn weighted_query<R: Rng + ?Sized>(rng: &mut R, weights: &[usize], r: usize) -> Query {
    let mut w: Vec<f64> = weights.iter().map(|&x| x as f64).collect();
    let mut free = Vec::with_capacity(r);
    for _ in 0..r.min(w.len()) {
        let total: f64 = w.iter().sum();
        let mut t = rng.gen::<f64>() * total;
        let mut pick = None;
        for (i, &x) in w.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            pick = Some(i);
            if t < x {
                break;
            }
            t -= x;
        }
        let i = pick.expect("positive weight remains");
        w[i] = 0.0;
        free.push(i);
    }
    Query::marginal(free)
}

/// Stateful query generator for the uniform, skewed and mixture schemes.
pub struct QuerySampler {
    scheme: Scheme,
    n: usize,
    levels: Vec<usize>,
}

impl QuerySampler {
    pub fn new(tree: &EliminationTree, scheme: Scheme) -> Result<Self> {
        if scheme == Scheme::Empirical {
            return Err(Error::contract("the empirical scheme replays a log and cannot be sampled"));
        }
        Ok(QuerySampler { scheme, n: tree.variable_count(), levels: variable_levels(tree) })
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// One query with `r` free variables and no bound variables.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, r: usize) -> Query {
        let uniform = match self.scheme {
            Scheme::Uniform => true,
            Scheme::Skewed => false,
            Scheme::Mixture(l) => rng.gen::<f64>() < l,
            Scheme::Empirical => unreachable!("rejected in new"),
        };
        if uniform {
            uniform_query(rng, self.n, r)
        } else {
            weighted_query(rng, &self.levels, r)
        }
    }
}

/// `samples_per_size` queries for each size of the spec, in size order. The
/// empirical scheme reads its log instead.
pub fn sample_workload<R: Rng + ?Sized>(
    tree: &EliminationTree,
    spec: &WorkloadSpec,
    net: &crate::model::BayesianNetwork,
    rng: &mut R,
) -> Result<Vec<Query>> {
    if spec.scheme == Scheme::Empirical {
        let path = spec.log.as_ref().ok_or_else(|| Error::contract("empirical workload needs a log"))?;
        let text = crate::parsers::read_text(path)?;
        return crate::model::parse_query_log(net, &text);
    }
    spec.check(tree.variable_count())?;
    let sampler = QuerySampler::new(tree, spec.scheme)?;
    let mut out = Vec::with_capacity(spec.sizes.len() * spec.samples_per_size);
    for &r in &spec.sizes {
        for _ in 0..spec.samples_per_size {
            out.push(sampler.sample(rng, r));
        }
    }
    Ok(out)
}

/// Profile for a spec: the closed form for the uniform scheme, sample
/// frequencies otherwise.
pub fn profile_for<R: Rng + ?Sized>(
    tree: &EliminationTree,
    spec: &WorkloadSpec,
    net: &crate::model::BayesianNetwork,
    rng: &mut R,
) -> Result<UsefulnessProfile> {
    if spec.scheme == Scheme::Uniform {
        spec.check(tree.variable_count())?;
        return Ok(base_usefulness_uniform(tree, &spec.sizes));
    }
    let queries = sample_workload(tree, spec, net, rng)?;
    if queries.is_empty() {
        return Err(Error::contract("workload sample is empty"));
    }
    Ok(base_usefulness_sampled(tree, &queries))
}

/// Every query with `r` free variables for each `r` in `sizes`, weighted so
/// the weights form the uniform workload distribution.
pub fn enumerate_uniform(n: usize, sizes: &[usize]) -> Vec<(Query, f64)> {
    let mut out = Vec::new();
    for &r in sizes {
        let subsets = subsets_of_size(n, r);
        let w = 1.0 / (sizes.len() as f64 * subsets.len() as f64);
        out.extend(subsets.into_iter().map(|s| (Query::marginal(s), w)));
    }
    out
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn subsets_of_size(n: usize, r: usize) -> Vec<Vec<VarId>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else { return out };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Random profile consistent with the tree (non-increasing toward the root),
/// using multiples of 1/64 so sums and differences stay exact.
pub fn random_profile<R: Rng + ?Sized>(tree: &EliminationTree, rng: &mut R) -> UsefulnessProfile {
    let mut steps = vec![0u32; tree.len()];
    let order = tree.post_order();
    for &u in order.iter().rev() {
        let floor = tree.node(u).parent.map_or(0, |p| steps[p]);
        steps[u] = match tree.node(u).kind {
            NodeKind::Virtual => 0,
            _ => floor + rng.gen_range(0..=(64 - floor).min(24)),
        };
    }
    UsefulnessProfile { base: steps.into_iter().map(|s| s as f64 / 64.0).collect() }
}

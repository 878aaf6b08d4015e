//! Query answering by variable elimination along the elimination tree,
//! reusing materialized tables where they apply.

mod bench;

pub use bench::{
    bench_csv, bench_queries, cost_time_correlation, executable, model_records, pearson, summarize, BenchRecord,
    BenchSummary, Measure,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::elimination::{EliminationTree, NodeId, NodeKind};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Factor, Query, Role, VarId, DEFAULT_ENTRY_CAP};
use crate::planner::MaterializationStore;

#[derive(Debug, Clone)]
pub struct QueryAnswer {
    /// `Pr(X_q, Y_q = y_q)` over the free variables.
    pub table: Factor,
    /// Sum of `2 × join size` over the nodes actually computed.
    pub cost_estimated: u64,
    /// Materialized nodes whose tables replaced their subtrees.
    pub nodes_skipped: Vec<NodeId>,
    pub elapsed: Duration,
}

impl QueryAnswer {
    /// `answer scope=<ids> mass=<float>` followed by the factor line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let scope = join_ids(self.table.scope());
        let _ = writeln!(s, "answer scope={scope} mass={}", self.table.total());
        s.push_str(&factor_line("-", &self.table));
        s
    }
}

pub(crate) fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// `factor <label> scope=<ids> : <values...>`.
pub(crate) fn factor_line(label: &str, f: &Factor) -> String {
    let mut s = format!("factor {label} scope={} :", join_ids(f.scope()));
    crate::parsers::write_values(&mut s, f.values());
    s.push('\n');
    s
}

/// Nodes marked when they are the elimination node of a free or bound
/// variable, or an ancestor of one. Exactly these fail `vars(u) ⊆ Z_q`.
fn blocked_nodes(query: &Query, tree: &EliminationTree) -> Vec<bool> {
    let mut blocked = vec![false; tree.len()];
    for v in query.mentioned() {
        let mut u = Some(tree.elim_node(v));
        while let Some(x) = u {
            if blocked[x] {
                break;
            }
            blocked[x] = true;
            u = tree.node(x).parent;
        }
    }
    blocked
}

/// Selected nodes that serve the query: every variable eliminated below them
/// is summed out, and no selected ancestor qualifies as well.
pub fn useful_set(query: &Query, selected: &[NodeId], tree: &EliminationTree) -> Vec<NodeId> {
    let blocked = blocked_nodes(query, tree);
    let mut in_set = vec![false; tree.len()];
    for &u in selected {
        in_set[u] = true;
    }
    let mut out: Vec<NodeId> = selected
        .iter()
        .copied()
        .filter(|&u| !blocked[u] && !tree.ancestors(u).any(|a| in_set[a] && !blocked[a]))
        .collect();
    out.sort_unstable();
    out
}

/// What a traversal carries between nodes.
trait Carrier: Sized {
    fn leaf(net: &BayesianNetwork, v: VarId) -> Self;
    /// Joins `parts`, handling `var` by its role (`None` for a plain join).
    fn step(parts: Vec<Self>, var: Option<(VarId, Role)>, tree: &EliminationTree, cap: u64) -> Result<(Self, u64)>;
}

impl Carrier for Factor {
    fn leaf(net: &BayesianNetwork, v: VarId) -> Self {
        net.cpt(v).clone()
    }

    fn step(parts: Vec<Self>, var: Option<(VarId, Role)>, _: &EliminationTree, cap: u64) -> Result<(Self, u64)> {
        let parts = match var {
            Some((x, Role::Bound(s))) => parts
                .into_iter()
                .map(|f| if f.contains(x) { f.reduce(x, s) } else { Ok(f) })
                .collect::<Result<Vec<_>>>()?,
            _ => parts,
        };
        let refs: Vec<&Factor> = parts.iter().collect();
        let joined = Factor::product(&refs, cap)?;
        let cost = 2 * joined.len() as u64;
        let out = match var {
            Some((x, Role::Summed)) => joined.sum_out(x)?,
            _ => joined,
        };
        Ok((out, cost))
    }
}

/// Scope-only stand-in for a factor, for costing without computing.
struct Scope(Vec<VarId>);

impl Carrier for Scope {
    fn leaf(net: &BayesianNetwork, v: VarId) -> Self {
        Scope(net.cpt(v).scope().to_vec())
    }

    fn step(parts: Vec<Self>, var: Option<(VarId, Role)>, tree: &EliminationTree, _: u64) -> Result<(Self, u64)> {
        let mut scope: Vec<VarId> = parts.into_iter().flat_map(|s| s.0).collect();
        scope.sort_unstable();
        scope.dedup();
        if let Some((x, Role::Bound(_))) = var {
            scope.retain(|&v| v != x);
        }
        let cost = tree.table_size(&scope).saturating_mul(2);
        if let Some((x, Role::Summed)) = var {
            scope.retain(|&v| v != x);
        }
        Ok((Scope(scope), cost))
    }
}

/// Post-order evaluation of `subtree(target)`. `stored(u)` supplies the
/// table of a node whose subtree is skipped.
fn evaluate<C: Carrier>(
    net: &BayesianNetwork,
    tree: &EliminationTree,
    query: &Query,
    target: NodeId,
    stored: &dyn Fn(NodeId) -> Option<C>,
    cap: u64,
    skipped: &mut Vec<NodeId>,
) -> Result<(C, u64, u64)> {
    let mut cost = 0u64;
    let mut peak = 0u64;
    // parts[u]: outputs waiting to be joined at u's nearest non-dummy ancestor
    let mut parts: BTreeMap<NodeId, Vec<C>> = BTreeMap::new();
    let mut stack = vec![(target, false)];
    let mut result = None;
    while let Some((u, expanded)) = stack.pop() {
        let node = tree.node(u);
        let out: Option<C> = if !expanded {
            if let Some(table) = stored(u) {
                skipped.push(u);
                Some(table)
            } else if let NodeKind::Leaf(v) = node.kind {
                Some(C::leaf(net, v))
            } else {
                stack.push((u, true));
                stack.extend(node.children.iter().rev().map(|&c| (c, false)));
                None
            }
        } else {
            let inputs = parts.remove(&u).unwrap_or_default();
            match node.kind {
                NodeKind::Dummy => {
                    // forward the children's outputs to the parent
                    let p = node.parent.expect("dummy has a parent");
                    parts.entry(p).or_default().extend(inputs);
                    continue;
                }
                NodeKind::Internal(x) => {
                    let (f, c) = C::step(inputs, Some((x, query.role(x))), tree, cap).map_err(|e| wrap_size(e, u))?;
                    cost = cost.saturating_add(c);
                    peak = peak.max(c / 2);
                    Some(f)
                }
                NodeKind::Virtual => {
                    let (f, c) = C::step(inputs, None, tree, cap).map_err(|e| wrap_size(e, u))?;
                    cost = cost.saturating_add(c);
                    peak = peak.max(c / 2);
                    Some(f)
                }
                NodeKind::Leaf(_) => unreachable!("leaves are not expanded"),
            }
        };
        if let Some(f) = out {
            if u == target {
                result = Some(f);
            } else {
                let p = node.parent.expect("non-target node has a parent");
                parts.entry(p).or_default().push(f);
            }
        }
    }
    Ok((result.expect("target evaluated"), cost, peak))
}

fn wrap_size(e: Error, node: NodeId) -> Error {
    match e {
        Error::SizeLimit { .. } => Error::NodeSizeLimit { node, source: Box::new(e) },
        other => other,
    }
}

/// Answers `query` with the default entry cap.
pub fn answer_query(
    query: &Query,
    net: &BayesianNetwork,
    tree: &EliminationTree,
    store: &MaterializationStore,
) -> Result<QueryAnswer> {
    answer_query_capped(query, net, tree, store, DEFAULT_ENTRY_CAP)
}

pub fn answer_query_capped(
    query: &Query,
    net: &BayesianNetwork,
    tree: &EliminationTree,
    store: &MaterializationStore,
    cap: u64,
) -> Result<QueryAnswer> {
    query.check(net)?;
    if tree.variable_count() != net.len() {
        return Err(Error::contract("tree was built for a different network"));
    }
    let start = Instant::now();
    let useful = useful_set(query, &store.selected(), tree);
    let mut is_useful = vec![false; tree.len()];
    for &u in &useful {
        is_useful[u] = true;
    }
    let stored = |u: NodeId| if is_useful[u] { store.table(u).cloned() } else { None };
    let mut skipped = Vec::new();
    let (table, cost, _) = evaluate::<Factor>(net, tree, query, tree.root(), &stored, cap, &mut skipped)?;
    skipped.sort_unstable();
    Ok(QueryAnswer { table, cost_estimated: cost, nodes_skipped: skipped, elapsed: start.elapsed() })
}

/// Cost `answer_query` reports for `query` under plan `selected`, computed on
/// scopes only.
pub fn query_cost(query: &Query, net: &BayesianNetwork, tree: &EliminationTree, selected: &[NodeId]) -> u64 {
    symbolic(query, net, tree, selected).0
}

/// Entries of the largest join `answer_query` builds for `query` under plan
/// `selected`.
pub fn query_peak(query: &Query, net: &BayesianNetwork, tree: &EliminationTree, selected: &[NodeId]) -> u64 {
    symbolic(query, net, tree, selected).1
}

fn symbolic(query: &Query, net: &BayesianNetwork, tree: &EliminationTree, selected: &[NodeId]) -> (u64, u64) {
    let useful = useful_set(query, selected, tree);
    let mut is_useful = vec![false; tree.len()];
    for &u in &useful {
        is_useful[u] = true;
    }
    let stored = |u: NodeId| is_useful[u].then(|| Scope(tree.node(u).scope_after.clone()));
    evaluate::<Scope>(net, tree, query, tree.root(), &stored, u64::MAX, &mut Vec::new())
        .map_or((u64::MAX, u64::MAX), |r| (r.1, r.2))
}

/// The fully summed-out table of node `u`, reusing any table in `store` below
/// it.
pub(crate) fn node_table(
    net: &BayesianNetwork,
    tree: &EliminationTree,
    u: NodeId,
    store: &BTreeMap<NodeId, Factor>,
    cap: u64,
) -> Result<Factor> {
    let all_summed = Query::default();
    let stored = |v: NodeId| if v != u { store.get(&v).cloned() } else { None };
    Ok(evaluate::<Factor>(net, tree, &all_summed, u, &stored, cap, &mut Vec::new())?.0)
}

/// `Pr(X_q | Y_q = y_q)`: the joint answer divided by its mass.
pub fn conditional(
    query: &Query,
    net: &BayesianNetwork,
    tree: &EliminationTree,
    store: &MaterializationStore,
) -> Result<Factor> {
    let joint = answer_query(query, net, tree, store)?.table;
    let mass = joint.total();
    if mass <= 0.0 {
        return Err(Error::contract("evidence has probability zero"));
    }
    Factor::new(joint.scope().to_vec(), joint.cards().to_vec(), joint.values().iter().map(|x| x / mass).collect())
}

/// `Σ_{s ∈ states} Pr(X_q, Y_q = y_q, var = s)`: a range predicate on `var`.
pub fn range(
    query: &Query,
    var: VarId,
    states: &[usize],
    net: &BayesianNetwork,
    tree: &EliminationTree,
    store: &MaterializationStore,
) -> Result<Factor> {
    if query.role(var) != Role::Summed {
        return Err(Error::contract(format!("range variable {var} is already in the query")));
    }
    let mut acc: Option<Factor> = None;
    for &s in states {
        let mut q = query.clone();
        q.bound.insert(var, s);
        let t = answer_query(&q, net, tree, store)?.table;
        acc = Some(match acc {
            None => t,
            Some(a) => {
                let values = a.values().iter().zip(t.values()).map(|(x, y)| x + y).collect();
                Factor::new(a.scope().to_vec(), a.cards().to_vec(), values)?
            }
        });
    }
    match acc {
        Some(f) => Ok(f),
        None => {
            let scope: Vec<VarId> = query.free.iter().copied().collect();
            let cards = scope.iter().map(|&v| net.cardinality(v)).collect();
            Factor::new(scope, cards, vec![0.0; query.free.iter().map(|&v| net.cardinality(v)).product()])
        }
    }
}

use std::collections::BTreeMap;

use crate::elimination::{EliminationTree, NodeId};
use crate::engine::{factor_line, node_table};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Factor, DEFAULT_ENTRY_CAP};
use crate::parsers::{parse_num, strip_comment, words};
use crate::planner::io::parse_plan_prefix;
use crate::planner::{write_plan, Budget, MaterializationPlan};

/// Precomputed summed-out tables for the nodes of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterializationStore {
    pub plan: MaterializationPlan,
    pub tables: BTreeMap<NodeId, Factor>,
}

impl MaterializationStore {
    pub fn empty(tree: &EliminationTree) -> Self {
        MaterializationStore { plan: MaterializationPlan::empty(tree, Budget::Cardinality(0)), tables: BTreeMap::new() }
    }

    pub fn selected(&self) -> Vec<NodeId> {
        self.tables.keys().copied().collect()
    }

    pub fn table(&self, u: NodeId) -> Option<&Factor> {
        self.tables.get(&u)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Stored entries in total.
    pub fn entries(&self) -> u64 {
        self.tables.values().map(|f| f.len() as u64).sum()
    }
}

/// Computes the table of every selected node, deepest first so that lower
/// tables are reused for higher ones.
pub fn materialize(
    plan: &MaterializationPlan,
    net: &BayesianNetwork,
    tree: &EliminationTree,
) -> Result<MaterializationStore> {
    materialize_capped(plan, net, tree, DEFAULT_ENTRY_CAP)
}

pub fn materialize_capped(
    plan: &MaterializationPlan,
    net: &BayesianNetwork,
    tree: &EliminationTree,
    cap: u64,
) -> Result<MaterializationStore> {
    if plan.tree_hash != tree.fingerprint() {
        return Err(Error::contract("plan was made for a different elimination tree"));
    }
    super::check_selectable(tree, &plan.selected)?;
    let mut nodes = plan.selected.clone();
    nodes.sort_by_key(|&u| std::cmp::Reverse(tree.depth(u)));
    let mut tables = BTreeMap::new();
    for u in nodes {
        let f = node_table(net, tree, u, &tables, cap)?;
        tables.insert(u, f);
    }
    Ok(MaterializationStore { plan: plan.clone(), tables })
}

/// Plan text followed by `factor <node> scope=<ids> : <values>` lines.
pub fn write_store(store: &MaterializationStore) -> String {
    let mut s = write_plan(&store.plan);
    for (u, f) in &store.tables {
        s.push_str(&factor_line(&u.to_string(), f));
    }
    s
}

pub fn parse_store(text: &str, tree: &EliminationTree) -> Result<MaterializationStore> {
    let (plan, used) = parse_plan_prefix(text)?;
    if plan.tree_hash != tree.fingerprint() {
        return Err(Error::contract("store was made for a different elimination tree"));
    }
    let cards = tree.cardinalities();
    let mut tables = BTreeMap::new();
    for (i, raw) in text.lines().enumerate().skip(used) {
        let line = i + 1;
        let w = words(strip_comment(raw));
        let Some(&(col, head)) = w.first() else { continue };
        let syntax = |column, message: String| Error::Syntax { line, column, message };
        if head != "factor" || w.len() < 4 || w[3].1 != ":" {
            return Err(syntax(col, "expected factor <node> scope=<ids> : <values>".into()));
        }
        let u: NodeId = parse_num(line, w[1], "node id")?;
        let scope_text = w[2].1.strip_prefix("scope=").ok_or_else(|| syntax(w[2].0, "expected scope=<ids>".into()))?;
        let scope: Vec<usize> = if scope_text.is_empty() {
            Vec::new()
        } else {
            scope_text.split(',').map(|v| parse_num(line, (w[2].0 + 6, v), "variable id")).collect::<Result<_>>()?
        };
        if let Some(&v) = scope.iter().find(|&&v| v >= cards.len()) {
            return Err(syntax(w[2].0, format!("variable {v} is not in the network")));
        }
        let values: Vec<f64> = w[4..].iter().map(|&t| parse_num(line, t, "value")).collect::<Result<_>>()?;
        let card: Vec<usize> = scope.iter().map(|&v| cards[v]).collect();
        let f = Factor::new(scope, card, values).map_err(|e| syntax(col, e.to_string()))?;
        if u >= tree.len() || f.scope() != tree.node(u).scope_after.as_slice() {
            return Err(syntax(col, format!("table does not match node {u} of the tree")));
        }
        tables.insert(u, f);
    }
    if tables.keys().ne(plan.selected.iter()) {
        return Err(Error::contract("store tables do not match the plan's nodes"));
    }
    Ok(MaterializationStore { plan, tables })
}

//! Choosing which elimination-tree nodes to precompute.
//!
//! The benefit of a set `R` is the expected cost saved per query:
//! `B(R) = Σ_{u∈R} (base(u) - base(lsa(u,R))) · U(u)`, where `lsa(u,R)` is the
//! lowest proper ancestor of `u` in `R`.

mod dp;
mod exhaustive;
mod greedy;
mod io;
mod store;

pub use dp::{dp_curve, plan_dp, plan_dp_space};
pub use exhaustive::{plan_exhaustive, EXHAUSTIVE_LIMIT};
pub use greedy::{plan_greedy, plan_greedy_space};
pub use io::{parse_plan, write_plan};
pub use store::{materialize, materialize_capped, parse_store, write_store, MaterializationStore};

use std::fmt;

use crate::elimination::{EliminationTree, NodeId};
use crate::error::{Error, Result};
use crate::workload::{usefulness_pair, UsefulnessProfile};

/// Budget on the selected set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// At most `k` nodes.
    Cardinality(usize),
    /// At most `K` stored table entries in total.
    Space(u64),
}

impl Budget {
    pub fn kind(self) -> &'static str {
        match self {
            Budget::Cardinality(_) => "k",
            Budget::Space(_) => "space",
        }
    }

    pub fn amount(self) -> u64 {
        match self {
            Budget::Cardinality(k) => k as u64,
            Budget::Space(k) => k,
        }
    }

    /// Budget units node `u` consumes.
    pub fn weight(self, tree: &EliminationTree, u: NodeId) -> u64 {
        match self {
            Budget::Cardinality(_) => 1,
            Budget::Space(_) => tree.node(u).w,
        }
    }

    pub fn admits(self, tree: &EliminationTree, selected: &[NodeId]) -> bool {
        selected.iter().map(|&u| self.weight(tree, u)).sum::<u64>() <= self.amount()
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.kind(), self.amount())
    }
}

impl std::str::FromStr for Budget {
    type Err = Error;

    /// `k=<int>` or `space=<int>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::contract(format!("budget must be k=<int> or space=<int>, got `{s}`"));
        let (kind, value) = s.split_once('=').ok_or_else(bad)?;
        let value: u64 = value.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "k" => Ok(Budget::Cardinality(value as usize)),
            "space" => Ok(Budget::Space(value)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Dp,
    Greedy,
    Exhaustive,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dp => "dp",
            Algorithm::Greedy => "greedy",
            Algorithm::Exhaustive => "exhaustive",
        }
    }
}

/// Per-node plan metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedNode {
    pub node: NodeId,
    /// `U(u)`.
    pub total: u64,
    /// `w(u)`.
    pub w: u64,
    /// `base(u)`.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterializationPlan {
    /// Selected node ids, ascending.
    pub selected: Vec<NodeId>,
    pub budget: Budget,
    pub algorithm: Algorithm,
    pub benefit: f64,
    pub per_node: Vec<PlannedNode>,
    /// Fingerprint of the tree the plan was made for.
    pub tree_hash: u64,
}

impl MaterializationPlan {
    pub(crate) fn new(
        tree: &EliminationTree,
        profile: &UsefulnessProfile,
        mut selected: Vec<NodeId>,
        budget: Budget,
        algorithm: Algorithm,
        benefit: f64,
    ) -> Self {
        selected.sort_unstable();
        let per_node = selected
            .iter()
            .map(|&u| PlannedNode { node: u, total: tree.node(u).total, w: tree.node(u).w, p: profile.base(u) })
            .collect();
        MaterializationPlan { selected, budget, algorithm, benefit, per_node, tree_hash: tree.fingerprint() }
    }

    /// Plan selecting nothing.
    pub fn empty(tree: &EliminationTree, budget: Budget) -> Self {
        MaterializationPlan {
            selected: Vec::new(),
            budget,
            algorithm: Algorithm::Dp,
            benefit: 0.0,
            per_node: Vec::new(),
            tree_hash: tree.fingerprint(),
        }
    }

    /// Total stored entries.
    pub fn space(&self) -> u64 {
        self.per_node.iter().map(|n| n.w).sum()
    }

    /// Checks the budget, node kinds and the recorded benefit.
    pub fn check(&self, tree: &EliminationTree, profile: &UsefulnessProfile) -> Result<()> {
        check_selectable(tree, &self.selected)?;
        if !self.budget.admits(tree, &self.selected) {
            return Err(Error::Invariant(format!("plan exceeds its budget {}", self.budget)));
        }
        let b = benefit(tree, &self.selected, profile)?;
        if (b - self.benefit).abs() > 1e-9 * b.abs().max(1.0) {
            return Err(Error::Invariant(format!("plan benefit {} but recomputed {b}", self.benefit)));
        }
        Ok(())
    }
}

pub(crate) fn check_selectable(tree: &EliminationTree, selected: &[NodeId]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for &u in selected {
        if u >= tree.len() || !tree.node(u).is_selectable() {
            return Err(Error::contract(format!("node {u} is not an internal node of the tree")));
        }
        if !seen.insert(u) {
            return Err(Error::contract(format!("node {u} selected twice")));
        }
    }
    Ok(())
}

/// Lowest proper ancestor of `u` in `in_set`.
pub fn lsa(tree: &EliminationTree, u: NodeId, in_set: &[bool]) -> Option<NodeId> {
    tree.ancestors(u).find(|&a| in_set[a])
}

/// Expected cost saving of materializing `selected`.
pub fn benefit(tree: &EliminationTree, selected: &[NodeId], profile: &UsefulnessProfile) -> Result<f64> {
    check_selectable(tree, selected)?;
    let mut in_set = vec![false; tree.len()];
    for &u in selected {
        in_set[u] = true;
    }
    let mut total = 0.0;
    for &u in selected {
        total += usefulness_pair(u, lsa(tree, u, &in_set), profile)? * tree.node(u).total as f64;
    }
    Ok(total)
}

/// Closed-form marginal benefit `B(R ∪ {u}) - B(R)`:
/// `(base(u) - base(lsa(u,R))) · (U(u) - Σ_{v∈hsd(u,R)} U(v))`.
pub fn marginal_benefit(
    tree: &EliminationTree,
    selected: &[NodeId],
    u: NodeId,
    profile: &UsefulnessProfile,
) -> Result<f64> {
    let mut in_set = vec![false; tree.len()];
    for &v in selected {
        in_set[v] = true;
    }
    if in_set[u] {
        return Ok(0.0);
    }
    let p = usefulness_pair(u, lsa(tree, u, &in_set), profile)?;
    let covered: u64 = selected
        .iter()
        .filter(|&&v| tree.ancestors(v).find(|&a| a == u || in_set[a]) == Some(u))
        .map(|&v| tree.node(v).total)
        .sum();
    Ok(p * (tree.node(u).total - covered) as f64)
}

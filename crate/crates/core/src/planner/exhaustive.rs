use crate::elimination::{EliminationTree, NodeId};
use crate::error::{Error, Result};
use crate::planner::{benefit, Algorithm, Budget, MaterializationPlan};
use crate::workload::UsefulnessProfile;

/// Largest internal-node count [`plan_exhaustive`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Best subset under the budget by enumerating every subset. Test oracle.
pub fn plan_exhaustive(
    tree: &EliminationTree,
    budget: Budget,
    profile: &UsefulnessProfile,
) -> Result<MaterializationPlan> {
    let nodes: Vec<NodeId> = tree.internal_nodes().collect();
    if nodes.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::contract(format!(
            "{} internal nodes, exhaustive search is limited to {EXHAUSTIVE_LIMIT}",
            nodes.len()
        )));
    }
    let weights: Vec<u64> = nodes.iter().map(|&u| budget.weight(tree, u)).collect();
    let mut best = (0.0, Vec::new());
    let mut current = Vec::new();
    search(tree, budget.amount(), profile, &nodes, &weights, 0, &mut current, &mut best)?;
    Ok(MaterializationPlan::new(tree, profile, best.1, budget, Algorithm::Exhaustive, best.0))
}

#[allow(clippy::too_many_arguments)]
fn search(
    tree: &EliminationTree,
    left: u64,
    profile: &UsefulnessProfile,
    nodes: &[NodeId],
    weights: &[u64],
    i: usize,
    current: &mut Vec<NodeId>,
    best: &mut (f64, Vec<NodeId>),
) -> Result<()> {
    if i == nodes.len() {
        let b = benefit(tree, current, profile)?;
        if b > best.0 {
            *best = (b, current.clone());
        }
        return Ok(());
    }
    search(tree, left, profile, nodes, weights, i + 1, current, best)?;
    if weights[i] <= left {
        current.push(nodes[i]);
        search(tree, left - weights[i], profile, nodes, weights, i + 1, current, best)?;
        current.pop();
    }
    Ok(())
}

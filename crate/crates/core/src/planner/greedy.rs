use crate::elimination::{EliminationTree, NodeId};
use crate::error::Result;
use crate::planner::{benefit, Algorithm, Budget, MaterializationPlan};
use crate::workload::{usefulness_pair, UsefulnessProfile};

/// Entry/exit times of a depth-first walk, for O(1) ancestor tests.
struct Euler {
    tin: Vec<usize>,
    tout: Vec<usize>,
}

impl Euler {
    fn new(tree: &EliminationTree) -> Self {
        let mut tin = vec![0; tree.len()];
        let mut tout = vec![0; tree.len()];
        let mut clock = 0;
        let mut stack = vec![(tree.root(), false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                tout[u] = clock;
            } else {
                tin[u] = clock;
                clock += 1;
                stack.push((u, true));
                stack.extend(tree.node(u).children.iter().map(|&c| (c, false)));
            }
        }
        Euler { tin, tout }
    }

    /// `a` is a proper ancestor of `u`.
    fn above(&self, a: NodeId, u: NodeId) -> bool {
        a != u && self.tin[a] <= self.tin[u] && self.tout[u] <= self.tout[a]
    }
}

/// Closed-form marginal benefit of `u` against the current selection.
fn delta(
    tree: &EliminationTree,
    euler: &Euler,
    selected: &[NodeId],
    u: NodeId,
    profile: &UsefulnessProfile,
) -> Result<f64> {
    let lsa = selected.iter().copied().filter(|&a| euler.above(a, u)).max_by_key(|&a| euler.tin[a]);
    let p = usefulness_pair(u, lsa, profile)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let below: Vec<NodeId> = selected.iter().copied().filter(|&v| euler.above(u, v)).collect();
    let covered: u64 =
        below.iter().filter(|&&v| !below.iter().any(|&w| euler.above(w, v))).map(|&v| tree.node(v).total).sum();
    Ok(p * (tree.node(u).total - covered) as f64)
}

fn run(
    tree: &EliminationTree,
    budget: Budget,
    profile: &UsefulnessProfile,
    normalized: bool,
) -> Result<MaterializationPlan> {
    let euler = Euler::new(tree);
    let candidates: Vec<NodeId> = tree.internal_nodes().collect();
    let mut selected: Vec<NodeId> = Vec::new();
    let mut taken = vec![false; tree.len()];
    let mut left = budget.amount();
    loop {
        let mut best: Option<(f64, NodeId)> = None;
        for &u in &candidates {
            let w = budget.weight(tree, u);
            if taken[u] || w > left {
                continue;
            }
            let d = delta(tree, &euler, &selected, u, profile)?;
            let score = if normalized { d / w as f64 } else { d };
            if score > 0.0 && best.is_none_or(|(b, _)| score > b) {
                best = Some((score, u));
            }
        }
        let Some((_, u)) = best else { break };
        taken[u] = true;
        selected.push(u);
        left -= budget.weight(tree, u);
    }
    let b = benefit(tree, &selected, profile)?;
    Ok(MaterializationPlan::new(tree, profile, selected, budget, Algorithm::Greedy, b))
}

/// Repeatedly adds the node with the largest marginal benefit, ties to the
/// smallest id, until `k` nodes are chosen or no node adds anything.
pub fn plan_greedy(tree: &EliminationTree, k: usize, profile: &UsefulnessProfile) -> Result<MaterializationPlan> {
    run(tree, Budget::Cardinality(k), profile, false)
}

/// Greedy on marginal benefit per stored entry, skipping nodes that no
/// longer fit.
pub fn plan_greedy_space(
    tree: &EliminationTree,
    space: u64,
    profile: &UsefulnessProfile,
) -> Result<MaterializationPlan> {
    run(tree, Budget::Space(space), profile, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{build_elimination_tree, EliminationOrder};
    use crate::model::fixtures::{survey, survey_ids::*};
    use crate::planner::{marginal_benefit, plan_dp};
    use crate::workload::base_usefulness_uniform;

    fn survey_tree() -> EliminationTree {
        let net = survey();
        build_elimination_tree(&net, &EliminationOrder::given(&net, vec![A, S, T, E, O, R]).unwrap())
    }

    #[test]
    fn first_pick_maximises_base_times_total() {
        let t = survey_tree();
        let p = base_usefulness_uniform(&t, &[1, 2, 3]);
        let plan = plan_greedy(&t, 1, &p).unwrap();
        let best = t
            .internal_nodes()
            .max_by(|&a, &b| {
                let (x, y) = (p.base(a) * t.node(a).total as f64, p.base(b) * t.node(b).total as f64);
                x.partial_cmp(&y).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        assert_eq!(plan.selected, vec![best]);
    }

    #[test]
    fn euler_delta_matches_reference() {
        let t = survey_tree();
        let p = base_usefulness_uniform(&t, &[1, 2]);
        let e = Euler::new(&t);
        let r = vec![t.elim_node(A), t.elim_node(E)];
        for u in t.internal_nodes() {
            let a = delta(&t, &e, &r, u, &p).unwrap();
            let b = if r.contains(&u) { 0.0 } else { marginal_benefit(&t, &r, u, &p).unwrap() };
            if !r.contains(&u) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn unit_weights_match_cardinality() {
        let t = survey_tree();
        let p = base_usefulness_uniform(&t, &[1, 2, 3]);
        for k in 0..4 {
            let g = plan_greedy(&t, k, &p).unwrap();
            assert!(g.benefit <= plan_dp(&t, k, &p).unwrap().benefit + 1e-9);
        }
    }

    #[test]
    fn space_greedy_respects_budget() {
        let t = survey_tree();
        let p = base_usefulness_uniform(&t, &[1, 2, 3]);
        for space in 0..12 {
            let g = plan_greedy_space(&t, space, &p).unwrap();
            assert!(g.space() <= space);
        }
    }
}

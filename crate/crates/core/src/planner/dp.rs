//! Exact selection by dynamic programming over the binarized tree.
//!
//! `M(u, κ, v)` is the best benefit obtainable inside `subtree(u)` with at
//! most `κ` budget units when `v` is the nearest selected proper ancestor of
//! `u`. Ancestors are indexed by position among the selectable proper
//! ancestors of `u`, nearest first, from 1; index 0 means "none".

use crate::elimination::{EliminationTree, NodeId};
use crate::error::{Error, Result};
use crate::planner::{Algorithm, Budget, MaterializationPlan};
use crate::workload::{usefulness_pair, UsefulnessProfile};

/// Upper bound on inner-loop steps before the DP refuses to run.
const WORK_LIMIT: f64 = 4e9;

#[derive(Default)]
struct Table {
    cap: usize,
    m: Vec<f64>,
}

impl Table {
    fn get(&self, opt: usize, kappa: usize) -> f64 {
        self.m[opt * (self.cap + 1) + kappa.min(self.cap)]
    }
}

struct Dp<'a> {
    tree: EliminationTree,
    profile: &'a UsefulnessProfile,
    sel_anc: Vec<Vec<NodeId>>,
    weight: Vec<usize>,
    tables: Vec<Table>,
}

impl<'a> Dp<'a> {
    fn new(tree: &EliminationTree, budget: Budget, profile: &'a UsefulnessProfile) -> Result<Self> {
        let tree = if tree.is_binary() { tree.clone() } else { tree.binarize() };
        let limit = usize::try_from(budget.amount()).unwrap_or(usize::MAX);
        let order = tree.post_order();
        let mut sel_anc = vec![Vec::new(); tree.len()];
        for &u in order.iter().rev() {
            if let Some(p) = tree.node(u).parent {
                let mut a = Vec::with_capacity(sel_anc[p].len() + 1);
                if tree.node(p).is_selectable() {
                    a.push(p);
                }
                a.extend_from_slice(&sel_anc[p]);
                sel_anc[u] = a;
            }
        }
        let weight: Vec<usize> = (0..tree.len())
            .map(|u| if tree.node(u).is_selectable() { budget.weight(&tree, u) as usize } else { 0 })
            .collect();
        let mut sub = vec![0usize; tree.len()];
        let mut work = 0.0;
        for &u in &order {
            let kids = &tree.node(u).children;
            sub[u] = kids.iter().map(|&c| sub[c]).fold(weight[u], usize::saturating_add);
            let caps: f64 = kids.iter().map(|&c| (sub[c].min(limit) + 1) as f64).product();
            work += (sel_anc[u].len() + 2) as f64 * caps;
        }
        if work > WORK_LIMIT {
            return Err(Error::contract(format!(
                "budget {budget} needs about {work:.0} DP steps on this tree; use a coarser budget or greedy"
            )));
        }
        let tables = (0..tree.len()).map(|_| Table::default()).collect();
        let mut dp = Dp { tree, profile, sel_anc, weight, tables };
        for &u in &order {
            let t = dp.table_for(u, sub[u].min(limit))?;
            dp.tables[u] = t;
        }
        Ok(dp)
    }

    fn ancestor(&self, u: NodeId, opt: usize) -> Option<NodeId> {
        opt.checked_sub(1).map(|i| self.sel_anc[u][i])
    }

    /// Children's option index for `u`'s option `opt` when `u` is not taken.
    fn pass_down(&self, u: NodeId, opt: usize) -> usize {
        if self.tree.node(u).is_selectable() && opt > 0 {
            opt + 1
        } else {
            opt
        }
    }

    fn gain(&self, u: NodeId, opt: usize) -> Result<f64> {
        Ok(usefulness_pair(u, self.ancestor(u, opt), self.profile)? * self.tree.node(u).total as f64)
    }

    /// Best split of `κ` over the children at option `opt`, for every `κ` in
    /// `0..=cap`, with the left child's share (smallest on ties).
    fn conv(&self, u: NodeId, opt: usize, cap: usize) -> (Vec<f64>, Vec<usize>) {
        match self.tree.node(u).children.as_slice() {
            [] => (vec![0.0; cap + 1], vec![0; cap + 1]),
            [c] => ((0..=cap).map(|k| self.tables[*c].get(opt, k)).collect(), vec![0; cap + 1]),
            [l, r] => {
                let (tl, tr) = (&self.tables[*l], &self.tables[*r]);
                let mut best = vec![f64::NEG_INFINITY; cap + 1];
                let mut arg = vec![0; cap + 1];
                for k in 0..=cap {
                    for kl in 0..=k.min(tl.cap) {
                        let v = tl.get(opt, kl) + tr.get(opt, k - kl);
                        if v > best[k] {
                            best[k] = v;
                            arg[k] = kl;
                        }
                    }
                }
                (best, arg)
            }
            _ => unreachable!("tree is binarized"),
        }
    }

    fn table_for(&self, u: NodeId, cap: usize) -> Result<Table> {
        let opts = self.sel_anc[u].len() + 1;
        let mut m = vec![0.0; opts * (cap + 1)];
        let wu = self.weight[u];
        let inside = self.tree.node(u).is_selectable().then(|| self.conv(u, 1, cap).0);
        for opt in 0..opts {
            let (out, _) = self.conv(u, self.pass_down(u, opt), cap);
            let row = &mut m[opt * (cap + 1)..(opt + 1) * (cap + 1)];
            row.copy_from_slice(&out);
            if let Some(inside) = &inside {
                let gain = self.gain(u, opt)?;
                for k in wu..=cap {
                    row[k] = row[k].max(gain + inside[k - wu]);
                }
            }
        }
        Ok(Table { cap, m })
    }

    fn root_value(&self, kappa: usize) -> f64 {
        self.tables[self.tree.root()].get(0, kappa)
    }

    /// Backtracks from `M(root, κ, none)`; a node is taken only when taking it
    /// is strictly better than leaving it out.
    fn construct(&self, kappa: usize) -> Result<Vec<NodeId>> {
        let mut out = Vec::new();
        let mut stack = vec![(self.tree.root(), kappa, 0usize)];
        while let Some((u, k, opt)) = stack.pop() {
            let cap = self.tables[u].cap;
            let k = k.min(cap);
            let wu = self.weight[u];
            let (out_vals, out_arg) = self.conv(u, self.pass_down(u, opt), cap);
            let mut next = (self.pass_down(u, opt), k, out_arg);
            if self.tree.node(u).is_selectable() && k >= wu {
                let (inside, in_arg) = self.conv(u, 1, cap);
                if self.gain(u, opt)? + inside[k - wu] > out_vals[k] {
                    out.push(u);
                    next = (1, k - wu, in_arg);
                }
            }
            let (child_opt, rest, arg) = next;
            match self.tree.node(u).children.as_slice() {
                [] => {}
                [c] => stack.push((*c, rest, child_opt)),
                [l, r] => {
                    stack.push((*l, arg[rest], child_opt));
                    stack.push((*r, rest - arg[rest], child_opt));
                }
                _ => unreachable!("tree is binarized"),
            }
        }
        Ok(out)
    }
}

fn run(tree: &EliminationTree, budget: Budget, profile: &UsefulnessProfile) -> Result<MaterializationPlan> {
    let dp = Dp::new(tree, budget, profile)?;
    let kappa = usize::try_from(budget.amount()).unwrap_or(usize::MAX);
    let selected = dp.construct(kappa)?;
    Ok(MaterializationPlan::new(tree, profile, selected, budget, Algorithm::Dp, dp.root_value(kappa)))
}

/// Optimal plan with at most `k` nodes.
pub fn plan_dp(tree: &EliminationTree, k: usize, profile: &UsefulnessProfile) -> Result<MaterializationPlan> {
    run(tree, Budget::Cardinality(k), profile)
}

/// Optimal plan storing at most `space` table entries.
pub fn plan_dp_space(tree: &EliminationTree, space: u64, profile: &UsefulnessProfile) -> Result<MaterializationPlan> {
    run(tree, Budget::Space(space), profile)
}

/// Optimal benefit for every cardinality budget `0..=k`.
pub fn dp_curve(tree: &EliminationTree, k: usize, profile: &UsefulnessProfile) -> Result<Vec<f64>> {
    let dp = Dp::new(tree, Budget::Cardinality(k), profile)?;
    Ok((0..=k).map(|kappa| dp.root_value(kappa)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{build_elimination_tree, EliminationOrder};
    use crate::model::fixtures::{survey, survey_ids::*};
    use crate::planner::{benefit, plan_exhaustive};
    use crate::workload::base_usefulness_uniform;

    fn survey_tree() -> EliminationTree {
        let net = survey();
        build_elimination_tree(&net, &EliminationOrder::given(&net, vec![A, S, T, E, O, R]).unwrap())
    }

    #[test]
    fn zero_budget_is_empty() {
        let t = survey_tree();
        let p = base_usefulness_uniform(&t, &[1, 2, 3]);
        let plan = plan_dp(&t, 0, &p).unwrap();
        assert!(plan.selected.is_empty());
        assert_eq!(plan.benefit, 0.0);
    }

    #[test]
    fn matches_exhaustive_on_survey() {
        let t = survey_tree();
        let p = base_usefulness_uniform(&t, &[1, 2, 3, 4, 5]);
        for k in 0..=6 {
            let dp = plan_dp(&t, k, &p).unwrap();
            let ex = plan_exhaustive(&t, Budget::Cardinality(k), &p).unwrap();
            assert!((dp.benefit - ex.benefit).abs() < 1e-9, "k={k}");
            assert!((benefit(&t, &dp.selected, &p).unwrap() - dp.benefit).abs() < 1e-9);
            assert!(dp.selected.len() <= k);
        }
        for space in [0, 1, 2, 3, 5, 8, 13, 40] {
            let dp = plan_dp_space(&t, space, &p).unwrap();
            let ex = plan_exhaustive(&t, Budget::Space(space), &p).unwrap();
            assert!((dp.benefit - ex.benefit).abs() < 1e-9, "space={space}");
            dp.check(&t, &p).unwrap();
        }
    }

    #[test]
    fn curve_is_monotone() {
        let t = survey_tree();
        let p = base_usefulness_uniform(&t, &[1, 2]);
        let c = dp_curve(&t, 6, &p).unwrap();
        assert_eq!(c[0], 0.0);
        assert!(c.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(c[3], plan_dp(&t, 3, &p).unwrap().benefit);
    }
}

//! Calibrated junction tree, the baseline materialized VE is compared with.

use std::collections::BTreeSet;

use crate::elimination::{moral_graph, EliminationOrder};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Factor, Query, VarId, DEFAULT_ENTRY_CAP};

#[derive(Debug, Clone)]
pub struct JunctionTree {
    /// Sorted variable sets.
    pub cliques: Vec<Vec<VarId>>,
    /// Tree edges `(a, b)` with `a < b`, parallel to `separators`.
    pub edges: Vec<(usize, usize)>,
    pub separators: Vec<Vec<VarId>>,
    /// Clique each CPT is multiplied into.
    pub assignment: Vec<usize>,
    /// Clique potentials: the products of assigned CPTs before calibration,
    /// the clique marginals after.
    pub potentials: Vec<Factor>,
    pub calibrated: bool,
    /// `2 × join size` summed over the calibration passes.
    pub calibration_cost: u64,
    cards: Vec<usize>,
    adj: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JtStats {
    pub clique_count: usize,
    /// Variables in the largest clique.
    pub max_clique_size: usize,
    /// Entries over all clique potentials.
    pub total_entries: u64,
}

#[derive(Debug, Clone)]
pub struct JtAnswer {
    pub table: Factor,
    /// `2 × join size` over the cliques combined for the answer.
    pub cost: u64,
    /// Cliques of the subtree used.
    pub cliques_used: usize,
}

fn is_subset(small: &[VarId], big: &[VarId]) -> bool {
    let mut it = big.iter();
    small.iter().all(|v| it.any(|b| b == v))
}

fn intersect(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect()
}

/// Triangulates the moral graph along `order`, keeps the maximal cliques and
/// joins them by a maximum spanning tree on separator size (ties to the
/// lexicographically smallest clique pair). Each CPT goes to the first clique
/// that covers it.
pub fn build_junction_tree(net: &BayesianNetwork, order: &EliminationOrder) -> Result<JunctionTree> {
    let n = net.len();
    let g = moral_graph(net);
    let mut adj: Vec<BTreeSet<VarId>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut candidates: Vec<Vec<VarId>> = Vec::with_capacity(n);
    for &v in &order.order {
        let ns: Vec<VarId> = adj[v].iter().copied().collect();
        let mut clique = ns.clone();
        clique.push(v);
        clique.sort_unstable();
        candidates.push(clique);
        for (i, &a) in ns.iter().enumerate() {
            adj[a].remove(&v);
            for &b in &ns[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    let mut cliques: Vec<Vec<VarId>> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let dominated =
            candidates.iter().enumerate().any(|(j, d)| j != i && is_subset(c, d) && (c.len() < d.len() || j < i));
        if !dominated {
            cliques.push(c.clone());
        }
    }
    cliques.sort();
    let m = cliques.len();
    let mut pairs = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            pairs.push((intersect(&cliques[a], &cliques[b]).len(), a, b));
        }
    }
    pairs.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut comp: Vec<usize> = (0..m).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        let mut y = x;
        while c[y] != r {
            let next = c[y];
            c[y] = r;
            y = next;
        }
        r
    }
    let mut edges = Vec::with_capacity(m.saturating_sub(1));
    for (_, a, b) in pairs {
        let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
        if ra != rb {
            comp[ra] = rb;
            edges.push((a, b));
        }
    }
    edges.sort_unstable();
    let separators = edges.iter().map(|&(a, b)| intersect(&cliques[a], &cliques[b])).collect();
    let mut tree_adj = vec![Vec::new(); m];
    for (e, &(a, b)) in edges.iter().enumerate() {
        tree_adj[a].push((b, e));
        tree_adj[b].push((a, e));
    }
    let assignment = (0..n)
        .map(|v| {
            cliques
                .iter()
                .position(|c| is_subset(net.cpt(v).scope(), c))
                .ok_or_else(|| Error::Invariant(format!("no clique covers the table of variable {v}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let cards = net.cardinalities();
    let mut potentials = Vec::with_capacity(m);
    for (i, c) in cliques.iter().enumerate() {
        let mut factors = vec![Factor::ones(c.clone(), c.iter().map(|&v| cards[v]).collect())?];
        factors.extend((0..n).filter(|&v| assignment[v] == i).map(|v| net.cpt(v).clone()));
        let refs: Vec<&Factor> = factors.iter().collect();
        potentials.push(Factor::product(&refs, DEFAULT_ENTRY_CAP)?);
    }
    Ok(JunctionTree {
        cliques,
        edges,
        separators,
        assignment,
        potentials,
        calibrated: false,
        calibration_cost: 0,
        cards,
        adj: tree_adj,
    })
}

impl JunctionTree {
    pub fn stats(&self) -> JtStats {
        JtStats {
            clique_count: self.cliques.len(),
            max_clique_size: self.cliques.iter().map(Vec::len).max().unwrap_or(0),
            total_entries: self.potentials.iter().map(|f| f.len() as u64).sum(),
        }
    }

    /// For every variable, the cliques containing it form a connected subtree.
    pub fn check_running_intersection(&self) -> Result<()> {
        for v in 0..self.cards.len() {
            let holders: Vec<usize> =
                (0..self.cliques.len()).filter(|&c| self.cliques[c].binary_search(&v).is_ok()).collect();
            let Some(&start) = holders.first() else { continue };
            let mut seen = vec![false; self.cliques.len()];
            let mut stack = vec![start];
            seen[start] = true;
            let mut reached = 0;
            while let Some(c) = stack.pop() {
                reached += 1;
                for &(d, _) in &self.adj[c] {
                    if !seen[d] && self.cliques[d].binary_search(&v).is_ok() {
                        seen[d] = true;
                        stack.push(d);
                    }
                }
            }
            if reached != holders.len() {
                return Err(Error::Invariant(format!("cliques holding variable {v} are not connected")));
            }
        }
        Ok(())
    }

    /// Cliques in a depth-first order from each component root, with parents.
    fn rooted(&self) -> (Vec<usize>, Vec<Option<(usize, usize)>>) {
        let m = self.cliques.len();
        let mut parent = vec![None; m];
        let mut seen = vec![false; m];
        let mut order = Vec::with_capacity(m);
        for r in 0..m {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            let mut stack = vec![r];
            while let Some(c) = stack.pop() {
                order.push(c);
                for &(d, e) in &self.adj[c] {
                    if !seen[d] {
                        seen[d] = true;
                        parent[d] = Some((c, e));
                        stack.push(d);
                    }
                }
            }
        }
        (order, parent)
    }
}

/// Two-pass sum-product message passing. Afterwards each potential is the
/// joint marginal of its clique.
pub fn calibrate(jt: &JunctionTree, _net: &BayesianNetwork) -> Result<JunctionTree> {
    let mut out = jt.clone();
    if jt.calibrated {
        return Ok(out);
    }
    let m = jt.cliques.len();
    let (order, parent) = jt.rooted();
    // up[c]: message from c to its parent; down[c]: message from the parent to c
    let mut up: Vec<Option<Factor>> = vec![None; m];
    let mut down: Vec<Option<Factor>> = vec![None; m];
    let mut children = vec![Vec::new(); m];
    for &c in &order {
        if let Some((p, _)) = parent[c] {
            children[p].push(c);
        }
    }
    let mut cost = 0u64;
    for &c in order.iter().rev() {
        let Some((_, e)) = parent[c] else { continue };
        let mut parts = vec![&jt.potentials[c]];
        parts.extend(children[c].iter().map(|&d| up[d].as_ref().expect("child message")));
        let joined = Factor::product(&parts, DEFAULT_ENTRY_CAP)?;
        cost += 2 * joined.len() as u64;
        up[c] = Some(joined.marginalize_onto(&jt.separators[e])?);
    }
    for &c in &order {
        let mut parts = vec![&jt.potentials[c]];
        if let Some(d) = down[c].as_ref() {
            parts.push(d);
        }
        parts.extend(children[c].iter().map(|&d| up[d].as_ref().expect("child message")));
        let belief = Factor::product(&parts, DEFAULT_ENTRY_CAP)?;
        cost += 2 * belief.len() as u64;
        for &d in &children[c] {
            let (_, e) = parent[d].expect("child has a parent");
            let msg = belief.marginalize_onto(&jt.separators[e])?.divide(up[d].as_ref().expect("child message"))?;
            down[d] = Some(msg);
        }
        out.potentials[c] = belief;
    }
    // separate components each carry mass 1 in the full joint
    out.calibrated = true;
    out.calibration_cost = cost;
    Ok(out)
}

/// Answers `Pr(X_q, Y_q = y_q)` from a calibrated tree. A query inside one
/// clique marginalizes that clique; otherwise the smallest subtree covering
/// the query variables is combined as `Π clique / Π separator`, reducing
/// bound variables first and summing out along the way.
pub fn jt_query(jt: &JunctionTree, q: &Query) -> Result<JtAnswer> {
    if !jt.calibrated {
        return Err(Error::contract("junction tree is not calibrated"));
    }
    let qvars: Vec<VarId> = {
        let mut v: Vec<VarId> = q.mentioned().collect();
        v.sort_unstable();
        v
    };
    if let Some(&v) = qvars.iter().find(|&&v| v >= jt.cards.len()) {
        return Err(Error::contract(format!("query variable {v} is not in the network")));
    }
    let reduce = |f: &Factor| -> Result<Factor> {
        let mut f = f.clone();
        for (&v, &s) in &q.bound {
            if f.contains(v) {
                f = f.reduce(v, s)?;
            }
        }
        Ok(f)
    };
    let free: Vec<VarId> = q.free.iter().copied().collect();
    if let Some(c) = (0..jt.cliques.len()).find(|&c| is_subset(&qvars, &jt.cliques[c])) {
        let f = reduce(&jt.potentials[c])?;
        return Ok(JtAnswer {
            cost: 2 * jt.potentials[c].len() as u64,
            table: f.marginalize_onto(&free)?,
            cliques_used: 1,
        });
    }
    // prune leaves whose query variables are all shared with their neighbour
    let m = jt.cliques.len();
    let mut alive = vec![true; m];
    let mut degree: Vec<usize> = jt.adj.iter().map(Vec::len).collect();
    let needed = |c: usize, sep: &[VarId]| {
        jt.cliques[c].iter().any(|v| qvars.binary_search(v).is_ok() && sep.binary_search(v).is_err())
    };
    let mut changed = true;
    while changed {
        changed = false;
        for c in 0..m {
            if !alive[c] || degree[c] > 1 {
                continue;
            }
            let nb = jt.adj[c].iter().find(|&&(d, _)| alive[d]).copied();
            let removable = match nb {
                Some((_, e)) => !needed(c, &jt.separators[e]),
                // isolated clique: keep it only if it holds a query variable
                None => !jt.cliques[c].iter().any(|v| qvars.binary_search(v).is_ok()),
            };
            if removable && alive.iter().filter(|&&a| a).count() > 1 {
                alive[c] = false;
                if let Some((d, _)) = nb {
                    degree[d] -= 1;
                }
                changed = true;
            }
        }
    }
    // post-order over the alive forest: each clique sends its belief divided
    // by the separator marginal, keeping separator and query variables
    let mut cost = 0u64;
    let mut seen = vec![false; m];
    let mut results = Vec::new();
    for r in 0..m {
        if !alive[r] || seen[r] {
            continue;
        }
        let mut order = Vec::new();
        let mut parent = vec![None; m];
        let mut stack = vec![r];
        seen[r] = true;
        while let Some(c) = stack.pop() {
            order.push(c);
            for &(d, e) in &jt.adj[c] {
                if alive[d] && !seen[d] {
                    seen[d] = true;
                    parent[d] = Some((c, e));
                    stack.push(d);
                }
            }
        }
        let mut inbox: Vec<Vec<Factor>> = vec![Vec::new(); m];
        for &c in order.iter().rev() {
            let mut parts = vec![reduce(&jt.potentials[c])?];
            parts.append(&mut inbox[c]);
            let refs: Vec<&Factor> = parts.iter().collect();
            let joined = Factor::product(&refs, DEFAULT_ENTRY_CAP)?;
            cost += 2 * joined.len() as u64;
            match parent[c] {
                Some((p, e)) => {
                    let sep = &jt.separators[e];
                    let keep: Vec<VarId> = joined
                        .scope()
                        .iter()
                        .copied()
                        .filter(|v| sep.binary_search(v).is_ok() || q.free.contains(v))
                        .collect();
                    let sep_marginal = reduce(&jt.potentials[c].marginalize_onto(sep)?)?;
                    inbox[p].push(joined.marginalize_onto(&keep)?.divide(&sep_marginal)?);
                }
                None => results.push(joined.marginalize_onto(&free)?),
            }
        }
    }
    // independent components multiply; each carries the evidence of its part
    let refs: Vec<&Factor> = results.iter().collect();
    let table = Factor::product(&refs, DEFAULT_ENTRY_CAP)?;
    Ok(JtAnswer { table, cost, cliques_used: alive.iter().filter(|&&a| a).count() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{elimination_order, Heuristic};
    use crate::model::fixtures::{chain3, survey, survey_ids::*};
    use crate::model::{joint_brute_force, BruteForce};

    fn calibrated(net: &BayesianNetwork) -> JunctionTree {
        let jt = build_junction_tree(net, &elimination_order(net, Heuristic::MinFill)).unwrap();
        calibrate(&jt, net).unwrap()
    }

    #[test]
    fn chain_cliques() {
        let net = chain3();
        let jt = calibrated(&net);
        assert_eq!(jt.cliques, vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(jt.separators, vec![vec![1]]);
        let q = Query::marginal([0, 2]);
        let a = jt_query(&jt, &q).unwrap();
        assert!(a.table.max_abs_diff(&joint_brute_force(&net, &q).unwrap()).unwrap() < 1e-12);
        assert_eq!(a.cliques_used, 2);
    }

    #[test]
    fn survey_cliques_match_hand_triangulation() {
        let net = survey();
        let jt = calibrated(&net);
        assert_eq!(jt.cliques, vec![vec![A, S, E], vec![E, O, R], vec![O, R, T]]);
        jt.check_running_intersection().unwrap();
        let bf = BruteForce::new(&net).unwrap();
        for (c, f) in jt.cliques.iter().zip(&jt.potentials) {
            let oracle = bf.answer(&Query::marginal(c.iter().copied())).unwrap();
            assert!(f.max_abs_diff(&oracle).unwrap() < 1e-12);
        }
        for q in [
            Query::marginal([A, T]),
            Query::new([S], [(T, 2)]),
            Query::marginal(0..6),
            Query::new([], [(A, 1), (R, 0)]),
        ] {
            let a = jt_query(&jt, &q).unwrap();
            assert!(a.table.max_abs_diff(&bf.answer(&q).unwrap()).unwrap() < 1e-12, "{q:?}");
        }
        let s = jt.stats();
        assert_eq!((s.clique_count, s.max_clique_size, s.total_entries), (3, 3, 12 + 8 + 12));
    }

    #[test]
    fn uncalibrated_tree_is_rejected() {
        let net = chain3();
        let jt = build_junction_tree(&net, &elimination_order(&net, Heuristic::MinFill)).unwrap();
        assert!(jt_query(&jt, &Query::marginal([0])).is_err());
    }
}

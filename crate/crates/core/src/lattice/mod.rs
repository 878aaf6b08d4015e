//! Lattice of shrunk subnetworks. Each query is routed to the smallest
//! member that still answers it, and the materialization budget is split
//! across members.

mod shrink;

pub use shrink::{m_separated, shrink, shrink_given, shrink_vars, Subnetwork};

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use crate::elimination::{build_elimination_tree, select_order, EliminationOrder, EliminationTree};
use crate::engine::{answer_query_capped, join_ids};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Factor, Query, VarId};
use crate::parsers::{parse_num, serialize_native, strip_comment, words};
use crate::planner::{dp_curve, plan_dp, MaterializationPlan, MaterializationStore};
use crate::workload::{base_usefulness_sampled, UsefulnessProfile};

#[derive(Debug, Clone)]
pub struct LatticeMember {
    pub id: usize,
    pub sub: Subnetwork,
    pub order: EliminationOrder,
    pub tree: EliminationTree,
    /// Share of the workload routed here.
    pub pi: f64,
    /// Usefulness under the queries routed here.
    pub profile: UsefulnessProfile,
    /// Smallest members strictly containing this one.
    pub parents: Vec<usize>,
    /// Largest members strictly contained in this one.
    pub children: Vec<usize>,
}

impl LatticeMember {
    pub fn vars(&self) -> &[VarId] {
        &self.sub.vars
    }

    pub fn parameter_count(&self) -> usize {
        self.sub.net.parameter_count()
    }

    fn contains(&self, vars: &[VarId]) -> bool {
        is_subset(vars, &self.sub.vars)
    }
}

/// Sorted-slice subset test. Members are induced subnetworks of one network,
/// so node containment implies labeled-edge containment.
fn is_subset(small: &[VarId], big: &[VarId]) -> bool {
    let mut it = big.iter();
    small.iter().all(|v| it.any(|b| b == v))
}

#[derive(Debug, Clone)]
pub struct Lattice {
    /// Member 0 is the full network.
    pub members: Vec<LatticeMember>,
    pub entry_cap: u64,
}

fn make_member(id: usize, sub: Subnetwork, cap: u64) -> Result<LatticeMember> {
    let order = select_order(&sub.net, cap)?;
    let tree = build_elimination_tree(&sub.net, &order);
    let profile = UsefulnessProfile { base: vec![0.0; tree.len()] };
    Ok(LatticeMember { id, sub, order, tree, pi: 0.0, profile, parents: Vec::new(), children: Vec::new() })
}

/// Expected parameter count of the member a query would be routed to, with
/// candidate variable sets `members` (the full set always included).
fn routed_parameters(shrinks: &[(Vec<VarId>, f64)], members: &[(Vec<VarId>, usize)]) -> f64 {
    shrinks
        .iter()
        .map(|(s, rho)| {
            let best = members
                .iter()
                .filter(|(m, _)| is_subset(s, m))
                .min_by_key(|(m, _)| m.len())
                .expect("the full network contains every shrink");
            rho * best.1 as f64
        })
        .sum()
}

/// Builds a lattice in three phases: shrink frequencies over `sample`, up to
/// `ell` greedy additions minimizing the expected routed parameter count,
/// then shares and per-member workloads from `fresh` (or `sample` when
/// `fresh` is empty).
pub fn build_lattice(
    net: &BayesianNetwork,
    sample: &[Query],
    fresh: &[Query],
    ell: usize,
    cap: u64,
) -> Result<Lattice> {
    if sample.is_empty() {
        return Err(Error::contract("lattice construction needs a non-empty query sample"));
    }
    let all: Vec<VarId> = (0..net.len()).collect();
    let mut freq: BTreeMap<Vec<VarId>, usize> = BTreeMap::new();
    for q in sample {
        q.check(net)?;
        *freq.entry(shrink_vars(net, q)).or_default() += 1;
    }
    let shrinks: Vec<(Vec<VarId>, f64)> = freq.into_iter().map(|(s, c)| (s, c as f64 / sample.len() as f64)).collect();
    let params = |vars: &[VarId]| -> usize { vars.iter().map(|&v| net.cpt(v).len()).sum() };
    let mut chosen: Vec<(Vec<VarId>, usize)> = vec![(all.clone(), params(&all))];
    let mut current = routed_parameters(&shrinks, &chosen);
    for _ in 0..ell {
        let mut best: Option<(f64, usize)> = None;
        for (i, (s, _)) in shrinks.iter().enumerate() {
            if chosen.iter().any(|(m, _)| m == s) {
                continue;
            }
            chosen.push((s.clone(), params(s)));
            let u = routed_parameters(&shrinks, &chosen);
            chosen.pop();
            if best.is_none_or(|(b, _)| u < b) {
                best = Some((u, i));
            }
        }
        match best {
            Some((u, i)) if u <= current => {
                chosen.push((shrinks[i].0.clone(), params(&shrinks[i].0)));
                current = u;
            }
            _ => break,
        }
    }
    let mut members = Vec::with_capacity(chosen.len());
    for (id, (vars, _)) in chosen.into_iter().enumerate() {
        let keep: Vec<bool> = (0..net.len()).map(|v| vars.binary_search(&v).is_ok()).collect();
        let (sub_net, ids) = net.induced_subnetwork(&keep)?;
        members.push(make_member(id, Subnetwork { net: sub_net, vars: ids }, cap)?);
    }
    link(&mut members);
    let mut lattice = Lattice { members, entry_cap: cap };
    lattice.estimate_workload(if fresh.is_empty() { sample } else { fresh })?;
    Ok(lattice)
}

/// Parent/child edges of the containment order (its Hasse diagram).
fn link(members: &mut [LatticeMember]) {
    let n = members.len();
    let strict = |a: &LatticeMember, b: &LatticeMember| a.sub.vars.len() < b.sub.vars.len() && b.contains(&a.sub.vars);
    for i in 0..n {
        let supers: Vec<usize> = (0..n).filter(|&j| strict(&members[i], &members[j])).collect();
        let parents: Vec<usize> =
            supers.iter().copied().filter(|&j| !supers.iter().any(|&k| strict(&members[k], &members[j]))).collect();
        members[i].parents = parents;
    }
    for i in 0..n {
        members[i].children = (0..n).filter(|&j| members[j].parents.contains(&i)).collect();
    }
}

impl Lattice {
    /// Lattice holding only the full network.
    pub fn trivial(net: &BayesianNetwork, cap: u64) -> Result<Lattice> {
        let all = vec![true; net.len()];
        let (sub_net, vars) = net.induced_subnetwork(&all)?;
        let mut m = make_member(0, Subnetwork { net: sub_net, vars }, cap)?;
        m.pi = 1.0;
        Ok(Lattice { members: vec![m], entry_cap: cap })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Re-estimates `π` and the member profiles from `queries`.
    pub fn estimate_workload(&mut self, queries: &[Query]) -> Result<()> {
        let mut routed: Vec<Vec<Query>> = vec![Vec::new(); self.members.len()];
        for q in queries {
            let m = map_query(self, q);
            routed[m].push(self.members[m].sub.localize(q)?);
        }
        let total = queries.len().max(1) as f64;
        for (m, qs) in self.members.iter_mut().zip(&routed) {
            m.pi = if queries.is_empty() { f64::from(u8::from(m.id == 0)) } else { qs.len() as f64 / total };
            m.profile = base_usefulness_sampled(&m.tree, qs);
        }
        Ok(())
    }

    /// Mean parameter count of the members the queries are routed to.
    pub fn expected_parameters(&self, queries: &[Query]) -> f64 {
        let sum: usize = queries.iter().map(|q| self.members[map_query(self, q)].parameter_count()).sum();
        sum as f64 / queries.len().max(1) as f64
    }

    /// Answers `q` on its routed member, with `stores[i]` for member `i` (or
    /// no stores at all). The answer uses the full network's ids.
    pub fn answer(&self, q: &Query, stores: Option<&[MaterializationStore]>) -> Result<(usize, Factor)> {
        let id = map_query(self, q);
        let m = &self.members[id];
        let empty;
        let store = match stores {
            Some(s) => &s[id],
            None => {
                empty = MaterializationStore::empty(&m.tree);
                &empty
            }
        };
        let local = m.sub.localize(q)?;
        let ans = answer_query_capped(&local, &m.sub.net, &m.tree, store, self.entry_cap)?;
        Ok((id, m.sub.globalize(&ans.table)?))
    }

    /// Splits `k` across members by [`allocate_budget`] and plans each member
    /// with its share.
    pub fn plan(&self, k: usize) -> Result<(Allocation, Vec<MaterializationPlan>)> {
        let curves = self.members.iter().map(|m| dp_curve(&m.tree, k, &m.profile)).collect::<Result<Vec<_>>>()?;
        let pis: Vec<f64> = self.members.iter().map(|m| m.pi).collect();
        let alloc = allocate_budget(&pis, &curves, k);
        let plans = self
            .members
            .iter()
            .zip(&alloc.budgets)
            .map(|(m, &ki)| plan_dp(&m.tree, ki, &m.profile))
            .collect::<Result<Vec<_>>>()?;
        Ok((alloc, plans))
    }
}

/// Breadth-first search from the full network through members containing
/// `shrink(q)`; returns the one with the fewest variables (first found on
/// ties).
pub fn map_query(lattice: &Lattice, q: &Query) -> usize {
    let target = shrink_vars(&lattice.members[0].sub.net, q);
    let mut seen = vec![false; lattice.members.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut best = 0;
    while let Some(i) = queue.pop_front() {
        let m = &lattice.members[i];
        if m.sub.vars.len() < lattice.members[best].sub.vars.len() {
            best = i;
        }
        for &c in &m.children {
            if !seen[c] && lattice.members[c].contains(&target) {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Budget `k_i` of each member.
    pub budgets: Vec<usize>,
    /// `Σ π_i B_i*(k_i)`.
    pub objective: f64,
}

/// Maximizes `Σ π_i B_i*(k_i)` subject to `Σ k_i ≤ k` by the recurrence
/// `B*(m+1, k) = max_κ { π_{m+1} B_{m+1}*(κ) + B*(m, k - κ) }`. A curve
/// shorter than `k + 1` is flat past its end.
pub fn allocate_budget(pis: &[f64], curves: &[Vec<f64>], k: usize) -> Allocation {
    assert_eq!(pis.len(), curves.len(), "one curve per member");
    let value = |i: usize, kappa: usize| -> f64 {
        let c = &curves[i];
        if c.is_empty() {
            0.0
        } else {
            pis[i] * c[kappa.min(c.len() - 1)]
        }
    };
    let m = pis.len();
    // best[i][b]: optimum over the first i members with budget b
    let mut best = vec![vec![0.0; k + 1]; m + 1];
    let mut choice = vec![vec![0usize; k + 1]; m + 1];
    for i in 0..m {
        for b in 0..=k {
            let mut top = f64::NEG_INFINITY;
            for kappa in 0..=b {
                let v = value(i, kappa) + best[i][b - kappa];
                if v > top {
                    top = v;
                    choice[i + 1][b] = kappa;
                }
            }
            best[i + 1][b] = top;
        }
    }
    let mut budgets = vec![0; m];
    let mut b = k;
    for i in (0..m).rev() {
        budgets[i] = choice[i + 1][b];
        b -= budgets[i];
    }
    Allocation { budgets, objective: best[m][k] }
}

/// One `member <id> vars=<ids> pi=<float> parent=<ids|->` line per member.
pub fn write_manifest(lattice: &Lattice) -> String {
    let mut s = String::new();
    for m in &lattice.members {
        let parents = if m.parents.is_empty() { "-".to_string() } else { join_ids(&m.parents) };
        let _ = writeln!(s, "member {} vars={} pi={} parent={}", m.id, join_ids(&m.sub.vars), m.pi, parents);
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: usize,
    pub vars: Vec<VarId>,
    pub pi: f64,
    pub parents: Vec<usize>,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let w = words(strip_comment(raw));
        if w.is_empty() {
            continue;
        }
        let err = |column: usize, message: &str| Error::Syntax { line, column, message: message.to_string() };
        if w[0].1 != "member" || w.len() != 5 {
            return Err(err(w[0].0, "expected member <id> vars=<ids> pi=<float> parent=<ids>"));
        }
        let field = |j: usize, key: &str| -> Result<&str> {
            w[j].1.strip_prefix(key).ok_or_else(|| err(w[j].0, &format!("expected {key}...")))
        };
        let ids = |j: usize, text: &str| -> Result<Vec<usize>> {
            if text == "-" || text.is_empty() {
                return Ok(Vec::new());
            }
            text.split(',').map(|t| parse_num(line, (w[j].0, t), "id")).collect()
        };
        out.push(ManifestEntry {
            id: parse_num(line, w[1], "member id")?,
            vars: ids(2, field(2, "vars=")?)?,
            pi: parse_num(line, (w[3].0, field(3, "pi=")?), "share")?,
            parents: ids(4, field(4, "parent=")?)?,
        });
    }
    Ok(out)
}

/// Writes `manifest.txt` and `member_<id>.bn` for every member into `dir`.
pub fn save_lattice(lattice: &Lattice, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("manifest.txt"), write_manifest(lattice))?;
    for m in &lattice.members {
        std::fs::write(dir.join(format!("member_{}.bn", m.id)), serialize_native(&m.sub.net))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{survey, survey_ids::*};
    use crate::model::{joint_brute_force, DEFAULT_ENTRY_CAP};

    fn queries() -> Vec<Query> {
        vec![
            Query::marginal([A]),
            Query::marginal([A]),
            Query::marginal([O, E]),
            Query::marginal([T]),
            Query::new([S], [(E, 1)]),
        ]
    }

    #[test]
    fn zero_additions_is_trivial() {
        let l = build_lattice(&survey(), &queries(), &[], 0, DEFAULT_ENTRY_CAP).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l.members[0].pi, 1.0);
    }

    #[test]
    fn repeated_query_added_first() {
        let q = vec![Query::marginal([O]); 4];
        let l = build_lattice(&survey(), &q, &[], 1, DEFAULT_ENTRY_CAP).unwrap();
        assert_eq!(l.members[1].vars(), &[A, S, E, O]);
        assert_eq!(map_query(&l, &q[0]), 1);
        assert_eq!(l.members[1].pi, 1.0);
        assert_eq!(l.members[1].parents, vec![0]);
    }

    #[test]
    fn routed_answers_match_full_network() {
        let net = survey();
        let l = build_lattice(&net, &queries(), &[], 3, DEFAULT_ENTRY_CAP).unwrap();
        let pis: f64 = l.members.iter().map(|m| m.pi).sum();
        assert!((pis - 1.0).abs() < 1e-9);
        for q in queries() {
            let (_, f) = l.answer(&q, None).unwrap();
            assert!(f.max_abs_diff(&joint_brute_force(&net, &q).unwrap()).unwrap() < 1e-9);
        }
        let (alloc, plans) = l.plan(2).unwrap();
        assert!(alloc.budgets.iter().sum::<usize>() <= 2);
        assert_eq!(plans.len(), l.len());
    }

    #[test]
    fn allocation_matches_enumeration() {
        let pis = [0.5, 0.3, 0.2];
        let curves = vec![vec![0.0, 4.0, 6.0, 7.0], vec![0.0, 5.0, 9.0, 10.0, 10.5], vec![0.0, 1.0]];
        for k in 0..=6 {
            let a = allocate_budget(&pis, &curves, k);
            let mut best = 0.0f64;
            for a0 in 0..=k {
                for a1 in 0..=k - a0 {
                    for a2 in 0..=k - a0 - a1 {
                        let v = 0.5 * curves[0][a0.min(3)] + 0.3 * curves[1][a1.min(4)] + 0.2 * curves[2][a2.min(1)];
                        best = best.max(v);
                    }
                }
            }
            assert!((a.objective - best).abs() < 1e-12);
        }
        assert_eq!(allocate_budget(&[1.0], &[vec![0.0, 1.0, 2.0]], 2).budgets, vec![2]);
    }

    #[test]
    fn manifest_round_trip() {
        let l = build_lattice(&survey(), &queries(), &[], 2, DEFAULT_ENTRY_CAP).unwrap();
        let parsed = parse_manifest(&write_manifest(&l)).unwrap();
        assert_eq!(parsed.len(), l.len());
        for (e, m) in parsed.iter().zip(&l.members) {
            assert_eq!(e.vars, m.vars());
            assert_eq!(e.pi, m.pi);
            assert_eq!(e.parents, m.parents);
        }
        let dir = tempfile::tempdir().unwrap();
        save_lattice(&l, dir.path()).unwrap();
        assert!(dir.path().join("member_0.bn").exists());
    }
}

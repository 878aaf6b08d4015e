use std::collections::HashMap;

use crate::error::{Error, Result, Violation};
use crate::model::{Factor, VarId};

/// Tolerance used when checking that CPT rows sum to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(id: VarId, name: impl Into<String>, states: Vec<String>) -> Self {
        Variable { id, name: name.into(), states }
    }

    /// Variable with states named `s0..s{k-1}`.
    pub fn with_cardinality(id: VarId, name: impl Into<String>, card: usize) -> Self {
        Variable::new(id, name, (0..card).map(|s| format!("s{s}")).collect())
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// A discrete Bayesian network: variables, ordered parent lists and one CPT per
/// variable. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    variables: Vec<Variable>,
    parents: Vec<Vec<VarId>>,
    cpts: Vec<Factor>,
    by_name: HashMap<String, VarId>,
}

impl BayesianNetwork {
    /// Assembles a network. Only shape is checked here (dense ids, parent ids
    /// in range, cardinalities); acyclicity and CPT contents are reported by
    /// [`validate_network`].
    pub fn from_parts(variables: Vec<Variable>, parents: Vec<Vec<VarId>>, cpts: Vec<Factor>) -> Result<Self> {
        let n = variables.len();
        if n == 0 {
            return Err(Error::contract("a network needs at least one variable"));
        }
        if parents.len() != n || cpts.len() != n {
            return Err(Error::contract("one parent list and one cpt per variable are required"));
        }
        let mut by_name = HashMap::with_capacity(n);
        for (i, v) in variables.iter().enumerate() {
            if v.id != i {
                return Err(Error::contract(format!("variable ids must be dense, found {} at {i}", v.id)));
            }
            if v.cardinality() == 0 {
                return Err(Error::contract(format!("variable {} has no states", v.name)));
            }
            if by_name.insert(v.name.clone(), i).is_some() {
                return Err(Error::contract(format!("duplicate variable name {}", v.name)));
            }
        }
        for (i, ps) in parents.iter().enumerate() {
            if let Some(p) = ps.iter().find(|&&p| p >= n) {
                return Err(Error::contract(format!("variable {i} has out-of-range parent {p}")));
            }
        }
        for cpt in &cpts {
            for (&v, &c) in cpt.scope().iter().zip(cpt.cards()) {
                if v >= n || variables[v].cardinality() != c {
                    return Err(Error::contract(format!(
                        "cpt mentions variable {v} with cardinality {c} that does not match the network"
                    )));
                }
            }
        }
        Ok(BayesianNetwork { variables, parents, cpts, by_name })
    }

    /// Like [`from_parts`](Self::from_parts) but also rejects networks with
    /// validation violations.
    pub fn new(variables: Vec<Variable>, parents: Vec<Vec<VarId>>, cpts: Vec<Factor>) -> Result<Self> {
        let net = Self::from_parts(variables, parents, cpts)?;
        let violations = validate_network(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id].cardinality()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::cardinality).collect()
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.parents[id]
    }

    pub fn cpt(&self, id: VarId) -> &Factor {
        &self.cpts[id]
    }

    pub fn cpts(&self) -> &[Factor] {
        &self.cpts
    }

    pub fn id_of(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    /// Resolves a variable by name, falling back to a numeric id.
    pub fn resolve(&self, token: &str) -> Option<VarId> {
        self.id_of(token).or_else(|| token.parse::<VarId>().ok().filter(|&i| i < self.len()))
    }

    /// Directed edges `(parent, child)` in child-major order.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        self.parents.iter().enumerate().flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c))).collect()
    }

    pub fn children(&self) -> Vec<Vec<VarId>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (p, c) in self.edges() {
            ch[p].push(c);
        }
        ch
    }

    /// Total number of CPT entries.
    pub fn parameter_count(&self) -> usize {
        self.cpts.iter().map(Factor::len).sum()
    }

    /// Topological order, or `None` when the parent relation has a cycle.
    pub fn topological_order(&self) -> Option<Vec<VarId>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let children = self.children();
        let mut ready: Vec<VarId> = (0..n).rev().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// `vars` together with all their ancestors, as a membership mask.
    pub fn ancestral_closure(&self, vars: impl IntoIterator<Item = VarId>) -> Vec<bool> {
        let mut keep = vec![false; self.len()];
        let mut stack: Vec<VarId> = vars.into_iter().collect();
        while let Some(v) = stack.pop() {
            if !keep[v] {
                keep[v] = true;
                stack.extend(self.parents[v].iter().copied());
            }
        }
        keep
    }

    /// Subnetwork induced by the variables flagged in `keep`, which must be
    /// closed under parents. Returns the subnetwork and, for each of its
    /// variables, the id in `self`.
    pub fn induced_subnetwork(&self, keep: &[bool]) -> Result<(BayesianNetwork, Vec<VarId>)> {
        let old_ids: Vec<VarId> = (0..self.len()).filter(|&v| keep[v]).collect();
        let mut new_id = vec![usize::MAX; self.len()];
        for (n, &o) in old_ids.iter().enumerate() {
            new_id[o] = n;
        }
        let mut variables = Vec::with_capacity(old_ids.len());
        let mut parents = Vec::with_capacity(old_ids.len());
        let mut cpts = Vec::with_capacity(old_ids.len());
        for (n, &o) in old_ids.iter().enumerate() {
            let v = &self.variables[o];
            variables.push(Variable::new(n, v.name.clone(), v.states.clone()));
            let mut ps = Vec::with_capacity(self.parents[o].len());
            for &p in &self.parents[o] {
                if !keep[p] {
                    return Err(Error::contract(format!(
                        "subnetwork keeps {} but drops its parent {}",
                        v.name, self.variables[p].name
                    )));
                }
                ps.push(new_id[p]);
            }
            parents.push(ps);
            let cpt = &self.cpts[o];
            // ascending old ids map to ascending new ids, so the layout is unchanged
            let scope = cpt.scope().iter().map(|&s| new_id[s]).collect();
            cpts.push(Factor::new(scope, cpt.cards().to_vec(), cpt.values().to_vec())?);
        }
        Ok((BayesianNetwork::from_parts(variables, parents, cpts)?, old_ids))
    }

    /// Drops variables with neither parents nor children.
    pub fn without_isolated(&self) -> Result<(BayesianNetwork, Vec<VarId>)> {
        let children = self.children();
        let keep: Vec<bool> = (0..self.len()).map(|v| !self.parents[v].is_empty() || !children[v].is_empty()).collect();
        if keep.iter().all(|k| !k) {
            return Err(Error::contract("every variable is isolated"));
        }
        self.induced_subnetwork(&keep)
    }

    /// Number of weakly connected components.
    pub fn weak_components(&self) -> Vec<usize> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let children = self.children();
        let mut next = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = next;
            while let Some(v) = stack.pop() {
                for &w in self.parents[v].iter().chain(&children[v]) {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// Checks acyclicity, CPT scopes and CPT row normalisation. Violations are
/// returned as data; an empty list means the network is valid.
pub fn validate_network(net: &BayesianNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    for v in net.variables() {
        let mut seen = std::collections::HashSet::new();
        for s in &v.states {
            if !seen.insert(s) {
                out.push(Violation::DuplicateState { var: v.id, state: s.clone() });
            }
        }
    }
    if net.topological_order().is_none() {
        out.push(Violation::Cycle { vars: cycle_members(net) });
    }
    for a in 0..net.len() {
        let mut expected: Vec<VarId> = net.parents(a).to_vec();
        expected.push(a);
        expected.sort_unstable();
        let dup = expected.windows(2).any(|w| w[0] == w[1]);
        let cpt = net.cpt(a);
        if dup || cpt.scope() != expected.as_slice() {
            out.push(Violation::CptScope { var: a, expected, found: cpt.scope().to_vec() });
            continue;
        }
        out.extend(row_sums(net, a).into_iter().filter_map(|(assignment, sum)| {
            ((sum - 1.0).abs() > NORMALIZATION_TOLERANCE).then_some(Violation::Normalization {
                var: a,
                parent_assignment: assignment,
                sum,
            })
        }));
    }
    out
}

/// Per parent assignment (in the order of `net.parents(a)`, last parent
/// fastest), the sum of the CPT row of `a`.
pub(crate) fn row_sums(net: &BayesianNetwork, a: VarId) -> Vec<(Vec<usize>, f64)> {
    let cpt = net.cpt(a);
    let parents = net.parents(a);
    let pcards: Vec<usize> = parents.iter().map(|&p| net.cardinality(p)).collect();
    let rows: usize = pcards.iter().product();
    let mut out = Vec::with_capacity(rows);
    let mut assignment = vec![0usize; parents.len()];
    let mut full = vec![0usize; cpt.scope().len()];
    for _ in 0..rows {
        for (p, &s) in parents.iter().zip(&assignment) {
            full[cpt.position(*p).unwrap()] = s;
        }
        let apos = cpt.position(a).unwrap();
        let mut sum = 0.0;
        for s in 0..net.cardinality(a) {
            full[apos] = s;
            sum += cpt.value_at(&full);
        }
        out.push((assignment.clone(), sum));
        for i in (0..assignment.len()).rev() {
            assignment[i] += 1;
            if assignment[i] < pcards[i] {
                break;
            }
            assignment[i] = 0;
        }
    }
    out
}

fn cycle_members(net: &BayesianNetwork) -> Vec<VarId> {
    // Kahn leftovers: every variable not removable by peeling sources
    let n = net.len();
    let mut indeg: Vec<usize> = (0..n).map(|v| net.parents(v).len()).collect();
    let children = net.children();
    let mut ready: Vec<VarId> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut removed = vec![false; n];
    while let Some(v) = ready.pop() {
        removed[v] = true;
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.push(c);
            }
        }
    }
    (0..n).filter(|&v| !removed[v]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::survey;

    #[test]
    fn survey_is_valid() {
        assert!(validate_network(&survey()).is_empty());
    }

    #[test]
    fn unnormalised_row_is_reported() {
        let vars = vec![Variable::with_cardinality(0, "A", 2), Variable::with_cardinality(1, "B", 2)];
        let cpts = vec![
            Factor::new(vec![0], vec![2], vec![0.5, 0.5]).unwrap(),
            Factor::new(vec![0, 1], vec![2, 2], vec![0.5, 0.4, 0.3, 0.7]).unwrap(),
        ];
        let net = BayesianNetwork::from_parts(vars, vec![vec![], vec![0]], cpts).unwrap();
        let v = validate_network(&net);
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::Normalization { var, parent_assignment, sum } => {
                assert_eq!(*var, 1);
                assert_eq!(parent_assignment, &vec![0]);
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let vars = vec![Variable::with_cardinality(0, "A", 2)];
        let cpts = vec![Factor::new(vec![0], vec![2], vec![0.5, 0.5]).unwrap()];
        let net = BayesianNetwork::from_parts(vars, vec![vec![0]], cpts).unwrap();
        let v = validate_network(&net);
        assert!(v.iter().any(|x| matches!(x, Violation::Cycle { vars } if vars == &vec![0])));
    }

    #[test]
    fn empty_network_is_rejected() {
        assert!(BayesianNetwork::from_parts(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn isolated_variables_are_dropped() {
        let vars = vec![
            Variable::with_cardinality(0, "A", 2),
            Variable::with_cardinality(1, "lonely", 3),
            Variable::with_cardinality(2, "B", 2),
        ];
        let cpts = vec![
            Factor::new(vec![0], vec![2], vec![0.5, 0.5]).unwrap(),
            Factor::new(vec![1], vec![3], vec![0.2, 0.3, 0.5]).unwrap(),
            Factor::new(vec![0, 2], vec![2, 2], vec![0.1, 0.9, 0.6, 0.4]).unwrap(),
        ];
        let net = BayesianNetwork::new(vars, vec![vec![], vec![], vec![0]], cpts).unwrap();
        let (sub, ids) = net.without_isolated().unwrap();
        assert_eq!(ids, vec![0, 2]);
        assert_eq!(sub.parents(1), &[0]);
        assert_eq!(sub.cpt(1).scope(), &[0, 1]);
        assert!(validate_network(&sub).is_empty());
    }
}

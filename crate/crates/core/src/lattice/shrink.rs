use std::collections::BTreeSet;

use crate::elimination::moral_graph;
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Factor, Query, VarId};

/// A subnetwork together with the id each of its variables has in the
/// network it was cut from. Ids are ascending, so the map is monotone.
#[derive(Debug, Clone)]
pub struct Subnetwork {
    pub net: BayesianNetwork,
    pub vars: Vec<VarId>,
}

impl Subnetwork {
    /// The query with ids translated into the subnetwork.
    pub fn localize(&self, q: &Query) -> Result<Query> {
        let local = |v: VarId| {
            self.vars.binary_search(&v).map_err(|_| Error::contract(format!("variable {v} is not in the subnetwork")))
        };
        Ok(Query {
            free: q.free.iter().map(|&v| local(v)).collect::<Result<_>>()?,
            bound: q.bound.iter().map(|(&v, &s)| Ok((local(v)?, s))).collect::<Result<_>>()?,
        })
    }

    /// A factor over subnetwork ids translated back to the original ids.
    pub fn globalize(&self, f: &Factor) -> Result<Factor> {
        let scope = f.scope().iter().map(|&v| self.vars[v]).collect();
        Factor::new(scope, f.cards().to_vec(), f.values().to_vec())
    }
}

/// True iff no path joins `a` and `b` in the moral graph once `separator` is
/// removed.
pub fn m_separated(net: &BayesianNetwork, a: VarId, b: VarId, separator: &BTreeSet<VarId>) -> Result<bool> {
    if a == b {
        return Err(Error::contract("m-separation needs two distinct variables"));
    }
    if separator.contains(&a) || separator.contains(&b) {
        return Err(Error::contract("separated variables may not be in the separator"));
    }
    if a >= net.len() || b >= net.len() {
        return Err(Error::contract("variable is not in the network"));
    }
    let mut blocked = vec![false; net.len()];
    for &u in separator {
        blocked[u] = true;
    }
    Ok(!moral_graph(net).connected_avoiding(a, b, &blocked))
}

/// Variables needed to answer the joint query `q`: the query variables and
/// their ancestors. Every other variable is barren and sums to one.
pub fn shrink_vars(net: &BayesianNetwork, q: &Query) -> Vec<VarId> {
    let keep = net.ancestral_closure(q.mentioned());
    (0..net.len()).filter(|&v| keep[v]).collect()
}

/// Smallest subnetwork that answers the joint query `q` exactly.
pub fn shrink(net: &BayesianNetwork, q: &Query) -> Result<Subnetwork> {
    let keep = net.ancestral_closure(q.mentioned());
    let (net, vars) = net.induced_subnetwork(&keep)?;
    Ok(Subnetwork { net, vars })
}

/// Shrink for the conditional query `Pr(X_q, Y_q \ given | given)`, where
/// `given ⊆ Y_q`. Ancestors separated from the other query variables by
/// `given` in the moral graph of the ancestral subnetwork are dropped as well.
/// A kept variable that loses a parent is always in `given`; its table is
/// replaced by a uniform one, which only rescales the joint by a constant,
/// so answers agree after normalization.
pub fn shrink_given(net: &BayesianNetwork, q: &Query, given: &BTreeSet<VarId>) -> Result<Subnetwork> {
    if let Some(v) = given.iter().find(|v| !q.bound.contains_key(v)) {
        return Err(Error::contract(format!("conditioning variable {v} is not bound in the query")));
    }
    let anc = shrink(net, q)?;
    let local_given: BTreeSet<VarId> = given.iter().map(|v| anc.vars.binary_search(v).expect("in closure")).collect();
    let targets: Vec<VarId> =
        q.mentioned().filter(|v| !given.contains(v)).map(|v| anc.vars.binary_search(&v).expect("in closure")).collect();
    let g = moral_graph(&anc.net);
    let n = anc.net.len();
    // everything reachable from the targets without passing through `given`
    let mut reach = vec![false; n];
    let mut stack = targets.clone();
    while let Some(v) = stack.pop() {
        if reach[v] || local_given.contains(&v) {
            continue;
        }
        reach[v] = true;
        stack.extend(g.neighbors(v).iter().copied());
    }
    let keep: Vec<bool> = (0..n).map(|v| reach[v] || local_given.contains(&v)).collect();
    let mut variables = Vec::new();
    let mut parents = Vec::new();
    let mut cpts = Vec::new();
    let kept: Vec<VarId> = (0..n).filter(|&v| keep[v]).collect();
    let new_id = |v: VarId| kept.binary_search(&v).expect("kept");
    for (i, &v) in kept.iter().enumerate() {
        let var = anc.net.variable(v);
        variables.push(crate::model::Variable::new(i, var.name.clone(), var.states.clone()));
        let ps = anc.net.parents(v);
        if ps.iter().all(|&p| keep[p]) {
            parents.push(ps.iter().map(|&p| new_id(p)).collect());
            let cpt = anc.net.cpt(v);
            let scope = cpt.scope().iter().map(|&s| new_id(s)).collect();
            cpts.push(Factor::new(scope, cpt.cards().to_vec(), cpt.values().to_vec())?);
        } else {
            debug_assert!(local_given.contains(&v));
            let k = var.cardinality();
            parents.push(Vec::new());
            cpts.push(Factor::new(vec![i], vec![k], vec![1.0 / k as f64; k])?);
        }
    }
    let net2 = BayesianNetwork::from_parts(variables, parents, cpts)?;
    Ok(Subnetwork { net: net2, vars: kept.iter().map(|&v| anc.vars[v]).collect() })
}

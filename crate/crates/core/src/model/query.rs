use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, VarId};

/// A joint query `Pr(X_q, Y_q = y_q)`. Every variable that is neither free nor
/// bound is summed out.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Query {
    pub free: BTreeSet<VarId>,
    pub bound: BTreeMap<VarId, usize>,
}

/// Role a variable plays in a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Free,
    Bound(usize),
    Summed,
}

impl Query {
    pub fn new(free: impl IntoIterator<Item = VarId>, bound: impl IntoIterator<Item = (VarId, usize)>) -> Self {
        Query { free: free.into_iter().collect(), bound: bound.into_iter().collect() }
    }

    /// Query with free variables only.
    pub fn marginal(free: impl IntoIterator<Item = VarId>) -> Self {
        Query::new(free, [])
    }

    pub fn check(&self, net: &BayesianNetwork) -> Result<()> {
        for &v in &self.free {
            if v >= net.len() {
                return Err(Error::contract(format!("query variable {v} is not in the network")));
            }
            if self.bound.contains_key(&v) {
                return Err(Error::contract(format!("variable {v} is both free and bound")));
            }
        }
        for (&v, &s) in &self.bound {
            if v >= net.len() {
                return Err(Error::contract(format!("query variable {v} is not in the network")));
            }
            if s >= net.cardinality(v) {
                return Err(Error::contract(format!(
                    "state {s} out of range for variable {} with {} states",
                    net.variable(v).name,
                    net.cardinality(v)
                )));
            }
        }
        Ok(())
    }

    pub fn role(&self, var: VarId) -> Role {
        if self.free.contains(&var) {
            Role::Free
        } else if let Some(&s) = self.bound.get(&var) {
            Role::Bound(s)
        } else {
            Role::Summed
        }
    }

    /// Free and bound variables.
    pub fn mentioned(&self) -> impl Iterator<Item = VarId> + '_ {
        self.free.iter().copied().chain(self.bound.keys().copied())
    }

    /// The summed-out set `Z_q` for a network with `n` variables.
    pub fn summed(&self, n: usize) -> Vec<VarId> {
        (0..n).filter(|v| matches!(self.role(*v), Role::Summed)).collect()
    }

    /// Translates variable ids through `map` (old id -> new id).
    pub fn remap(&self, map: impl Fn(VarId) -> VarId) -> Query {
        Query {
            free: self.free.iter().map(|&v| map(v)).collect(),
            bound: self.bound.iter().map(|(&v, &s)| (map(v), s)).collect(),
        }
    }

    /// Parses the query-log line format `free: a,b bound: c=2`. Variables may
    /// be names or numeric ids; states may be names or indices.
    pub fn parse(net: &BayesianNetwork, line: &str) -> Result<Query> {
        let syntax = |message: String| Error::Syntax { line: 1, column: 1, message };
        let line = line.trim();
        let (free_part, bound_part) = match line.find("bound:") {
            Some(i) => (&line[..i], Some(&line[i + "bound:".len()..])),
            None => (line, None),
        };
        let free_part = free_part.trim();
        let free_part = free_part
            .strip_prefix("free:")
            .ok_or_else(|| syntax(format!("query line must start with `free:`: {line}")))?;
        let resolve =
            |tok: &str| net.resolve(tok).ok_or_else(|| Error::UnknownVariable { line: 1, name: tok.to_string() });
        let mut q = Query::default();
        for tok in free_part.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            q.free.insert(resolve(tok)?);
        }
        if let Some(bp) = bound_part {
            for tok in bp.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (name, state) =
                    tok.split_once('=').ok_or_else(|| syntax(format!("bound entry `{tok}` must be var=state")))?;
                let v = resolve(name.trim())?;
                let state = state.trim();
                let s = net
                    .variable(v)
                    .state_index(state)
                    .or_else(|| state.parse().ok())
                    .ok_or_else(|| syntax(format!("unknown state `{state}` for {}", net.variable(v).name)))?;
                q.bound.insert(v, s);
            }
        }
        q.check(net)?;
        Ok(q)
    }

    /// Formats the query in the query-log line format using variable names
    /// and state indices.
    pub fn to_line(&self, net: &BayesianNetwork) -> String {
        let mut s = String::from("free: ");
        let names: Vec<&str> = self.free.iter().map(|&v| net.variable(v).name.as_str()).collect();
        s.push_str(&names.join(","));
        if !self.bound.is_empty() {
            s.push_str(" bound: ");
            let parts: Vec<String> =
                self.bound.iter().map(|(&v, &st)| format!("{}={st}", net.variable(v).name)).collect();
            s.push_str(&parts.join(","));
        }
        s
    }
}

/// Reads a query log: one query per line, blank lines and `#` comments skipped.
pub fn parse_query_log(net: &BayesianNetwork, text: &str) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let q = Query::parse(net, line).map_err(|e| match e {
            Error::Syntax { message, .. } => Error::Syntax { line: i + 1, column: 1, message },
            Error::UnknownVariable { name, .. } => Error::UnknownVariable { line: i + 1, name },
            other => other,
        })?;
        out.push(q);
    }
    Ok(out)
}

pub fn write_query_log(net: &BayesianNetwork, queries: &[Query]) -> String {
    let mut s = String::new();
    for q in queries {
        let _ = writeln!(s, "{}", q.to_line(net));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::survey;

    #[test]
    fn parse_names_and_states() {
        let net = survey();
        let q = Query::parse(&net, "free: T bound: A=young").unwrap();
        assert_eq!(q, Query::new([5], [(0, 0)]));
        let q2 = Query::parse(&net, "free: T,O bound: A=2, S=F").unwrap();
        assert_eq!(q2, Query::new([5, 3], [(0, 2), (1, 1)]));
        assert_eq!(Query::parse(&net, &q2.to_line(&net)).unwrap(), q2);
    }

    #[test]
    fn parse_errors() {
        let net = survey();
        assert!(matches!(Query::parse(&net, "free: Q"), Err(Error::UnknownVariable { .. })));
        assert!(matches!(Query::parse(&net, "T"), Err(Error::Syntax { .. })));
        assert!(matches!(Query::parse(&net, "free: T bound: T=1"), Err(Error::Contract(_))));
        assert!(Query::parse(&net, "free: bound: A=9").is_err());
    }

    #[test]
    fn summed_set_is_complement() {
        let q = Query::new([5], [(0, 0)]);
        assert_eq!(q.summed(6), vec![1, 2, 3, 4]);
    }
}

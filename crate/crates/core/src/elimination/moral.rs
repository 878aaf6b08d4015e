use std::collections::BTreeSet;

use crate::model::{BayesianNetwork, VarId};

/// Undirected moral graph: parent-child edges plus edges between co-parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoralGraph {
    adj: Vec<BTreeSet<VarId>>,
}

impl MoralGraph {
    pub fn with_nodes(n: usize) -> Self {
        MoralGraph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, a: VarId, b: VarId) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn neighbors(&self, v: VarId) -> &BTreeSet<VarId> {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: VarId, b: VarId) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for (a, ns) in self.adj.iter().enumerate() {
            out.extend(ns.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }

    /// True when some path joins `a` and `b` avoiding `blocked`.
    pub fn connected_avoiding(&self, a: VarId, b: VarId, blocked: &[bool]) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = std::collections::VecDeque::from([a]);
        seen[a] = true;
        while let Some(v) = queue.pop_front() {
            if v == b {
                return true;
            }
            for &w in &self.adj[v] {
                if !seen[w] && !blocked[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }
}

pub fn moral_graph(net: &BayesianNetwork) -> MoralGraph {
    let mut g = MoralGraph::with_nodes(net.len());
    for v in 0..net.len() {
        let ps = net.parents(v);
        for (i, &p) in ps.iter().enumerate() {
            g.add_edge(p, v);
            for &q in &ps[i + 1..] {
                g.add_edge(p, q);
            }
        }
    }
    g
}

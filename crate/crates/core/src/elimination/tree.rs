use std::fmt::Write as _;

use crate::elimination::EliminationOrder;
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, VarId};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// CPT of the given variable.
    Leaf(VarId),
    /// Elimination step for the given variable.
    Internal(VarId),
    /// Chain node added by [`EliminationTree::binarize`].
    Dummy,
    /// Joins the component trees of a disconnected network.
    Virtual,
}

impl NodeKind {
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Leaf(_) => "leaf",
            NodeKind::Internal(_) => "internal",
            NodeKind::Dummy => "dummy",
            NodeKind::Virtual => "virtual",
        }
    }

    pub fn var(self) -> Option<VarId> {
        match self {
            NodeKind::Leaf(v) | NodeKind::Internal(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Scope of the joined table before the node's variable is summed out.
    pub join_scope: Vec<VarId>,
    /// Scope of the node's output once every subtree variable is summed out.
    pub scope_after: Vec<VarId>,
    /// Partial cost `c(u)`: twice the join size.
    pub c: u64,
    /// Total cost `U(u) = c(u) + sum of children's U`.
    pub total: u64,
    /// Entries of the summed-out output table.
    pub w: u64,
    /// Variables eliminated at internal nodes of the subtree, ascending.
    pub vars: Vec<VarId>,
}

impl TreeNode {
    pub fn is_selectable(&self) -> bool {
        matches!(self.kind, NodeKind::Internal(_))
    }
}

/// Query-independent tree of variable-elimination steps.
///
/// Leaves `0..n` hold the CPT of variable `i`; internal node `n + k` eliminates
/// the `k`-th variable of the order. A virtual root and binarization dummies,
/// when present, follow.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationTree {
    nodes: Vec<TreeNode>,
    root: NodeId,
    n: usize,
    elim_node: Vec<NodeId>,
    cards: Vec<usize>,
    order: Vec<VarId>,
}

fn size_of(scope: &[VarId], cards: &[usize]) -> u64 {
    scope.iter().fold(1u64, |acc, &v| acc.saturating_mul(cards[v] as u64))
}

fn merge_sorted(parts: impl IntoIterator<Item = impl IntoIterator<Item = VarId>>) -> Vec<VarId> {
    let mut out: Vec<VarId> = parts.into_iter().flatten().collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn build_elimination_tree(net: &BayesianNetwork, order: &EliminationOrder) -> EliminationTree {
    let n = net.len();
    let cards = net.cardinalities();
    let mut nodes: Vec<TreeNode> = (0..n)
        .map(|v| {
            let scope = net.cpt(v).scope().to_vec();
            TreeNode {
                id: v,
                kind: NodeKind::Leaf(v),
                parent: None,
                children: Vec::new(),
                w: size_of(&scope, &cards),
                join_scope: scope.clone(),
                scope_after: scope,
                c: 0,
                total: 0,
                vars: Vec::new(),
            }
        })
        .collect();
    // live[v]: nodes whose output still mentions v
    let mut live: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut is_live = vec![true; n];
    for v in 0..n {
        for &x in net.cpt(v).scope() {
            live[x].push(v);
        }
    }
    let mut elim_node = vec![0; n];
    for &x in &order.order {
        let id = nodes.len();
        let mut children: Vec<NodeId> = std::mem::take(&mut live[x]).into_iter().filter(|&c| is_live[c]).collect();
        children.sort_unstable();
        children.dedup();
        let join_scope = merge_sorted(children.iter().map(|&c| nodes[c].scope_after.iter().copied()));
        let scope_after: Vec<VarId> = join_scope.iter().copied().filter(|&v| v != x).collect();
        let c = size_of(&join_scope, &cards).saturating_mul(2);
        let total = children.iter().fold(c, |acc, &ch| acc.saturating_add(nodes[ch].total));
        let vars = merge_sorted(children.iter().map(|&ch| nodes[ch].vars.clone()).chain([vec![x]]));
        for &ch in &children {
            is_live[ch] = false;
            nodes[ch].parent = Some(id);
        }
        for &v in &scope_after {
            live[v].push(id);
        }
        is_live.push(true);
        elim_node[x] = id;
        nodes.push(TreeNode {
            id,
            kind: NodeKind::Internal(x),
            parent: None,
            children,
            w: size_of(&scope_after, &cards),
            join_scope,
            scope_after,
            c,
            total,
            vars,
        });
    }
    let roots: Vec<NodeId> = (n..nodes.len()).filter(|&u| nodes[u].parent.is_none()).collect();
    let root = if roots.len() == 1 {
        roots[0]
    } else {
        let id = nodes.len();
        for &r in &roots {
            nodes[r].parent = Some(id);
        }
        let total = roots.iter().fold(0u64, |acc, &r| acc.saturating_add(nodes[r].total));
        nodes.push(TreeNode {
            id,
            kind: NodeKind::Virtual,
            parent: None,
            children: roots,
            join_scope: Vec::new(),
            scope_after: Vec::new(),
            c: 0,
            total,
            w: 1,
            vars: (0..n).collect(),
        });
        id
    };
    EliminationTree { nodes, root, n, elim_node, cards, order: order.order.clone() }
}

impl EliminationTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, u: NodeId) -> &TreeNode {
        &self.nodes[u]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Number of network variables.
    pub fn variable_count(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> &[VarId] {
        &self.order
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    /// Internal node eliminating `v`.
    pub fn elim_node(&self, v: VarId) -> NodeId {
        self.elim_node[v]
    }

    /// Leaves plus internal nodes: `2n` for every network.
    pub fn real_node_count(&self) -> usize {
        self.nodes.iter().filter(|u| matches!(u.kind, NodeKind::Leaf(_) | NodeKind::Internal(_))).count()
    }

    /// Internal (selectable) node ids in elimination order.
    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|u| u.is_selectable()).map(|u| u.id)
    }

    /// Proper ancestors of `u`, nearest first.
    pub fn ancestors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.nodes[u].parent, move |&a| self.nodes[a].parent)
    }

    /// True when `a` is `u` or one of its ancestors.
    pub fn is_ancestor_or_self(&self, a: NodeId, u: NodeId) -> bool {
        a == u || self.ancestors(u).any(|x| x == a)
    }

    pub fn depth(&self, u: NodeId) -> usize {
        self.ancestors(u).count()
    }

    /// Children before parents.
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if expanded {
                out.push(u);
            } else {
                stack.push((u, true));
                for &c in self.nodes[u].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut best = 0;
        for u in self.post_order().into_iter().rev() {
            if let Some(p) = self.nodes[u].parent {
                depth[u] = depth[p] + 1;
            }
            best = best.max(depth[u]);
        }
        best
    }

    pub fn max_children(&self) -> usize {
        self.nodes.iter().map(|u| u.children.len()).max().unwrap_or(0)
    }

    /// Table entries of the output of `scope` under this tree's cardinalities.
    pub fn table_size(&self, scope: &[VarId]) -> u64 {
        size_of(scope, &self.cards)
    }

    /// Splits every node with more than two children into a chain of dummies,
    /// keeping all existing ids. Dummies have `c = 0`, `w = 0`.
    pub fn binarize(&self) -> EliminationTree {
        let mut t = self.clone();
        for u in 0..self.nodes.len() {
            if t.nodes[u].children.len() <= 2 {
                continue;
            }
            let kids = t.nodes[u].children.clone();
            // u keeps kids[0] and a dummy holding the rest, recursively
            let mut holder = u;
            let mut first = kids[0];
            for &next in &kids[1..kids.len() - 1] {
                let d = t.nodes.len();
                t.nodes[holder].children = vec![first, d];
                t.nodes[first].parent = Some(holder);
                t.nodes.push(TreeNode {
                    id: d,
                    kind: NodeKind::Dummy,
                    parent: Some(holder),
                    children: Vec::new(),
                    join_scope: Vec::new(),
                    scope_after: Vec::new(),
                    c: 0,
                    total: 0,
                    w: 0,
                    vars: Vec::new(),
                });
                holder = d;
                first = next;
            }
            let last = *kids.last().unwrap();
            t.nodes[holder].children = vec![first, last];
            t.nodes[first].parent = Some(holder);
            t.nodes[last].parent = Some(holder);
        }
        // dummy annotations, bottom-up
        for u in t.post_order() {
            if t.nodes[u].kind == NodeKind::Dummy {
                let kids = t.nodes[u].children.clone();
                t.nodes[u].total = kids.iter().map(|&c| t.nodes[c].total).fold(0, u64::saturating_add);
                t.nodes[u].vars = merge_sorted(kids.iter().map(|&c| t.nodes[c].vars.clone()));
                t.nodes[u].scope_after = merge_sorted(kids.iter().map(|&c| t.nodes[c].scope_after.clone()));
                t.nodes[u].join_scope = t.nodes[u].scope_after.clone();
            }
        }
        t
    }

    pub fn is_binary(&self) -> bool {
        self.max_children() <= 2
    }

    /// Replaces `c` and `w` of internal nodes and recomputes `U`. Used to put
    /// synthetic annotations on a real tree shape.
    pub fn with_annotations(&self, c: &[u64], w: &[u64]) -> Result<EliminationTree> {
        if c.len() != self.nodes.len() || w.len() != self.nodes.len() {
            return Err(Error::contract("annotation vectors must cover every node"));
        }
        let mut t = self.clone();
        for u in t.post_order() {
            let node = &t.nodes[u];
            let (cu, wu) = if node.is_selectable() { (c[u], w[u]) } else { (node.c, node.w) };
            let total = node.children.iter().map(|&ch| t.nodes[ch].total).fold(cu, u64::saturating_add);
            let node = &mut t.nodes[u];
            node.c = cu;
            node.w = wu;
            node.total = if matches!(node.kind, NodeKind::Leaf(_)) { 0 } else { total };
        }
        Ok(t)
    }

    /// One line per node: `node <id> <kind> <var|-> parent=<id|-> c= U= w=`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for u in &self.nodes {
            let var = u.kind.var().map_or("-".to_string(), |v| v.to_string());
            let parent = u.parent.map_or("-".to_string(), |p| p.to_string());
            let _ = writeln!(
                s,
                "node {} {} {} parent={} c={} U={} w={}",
                u.id,
                u.kind.label(),
                var,
                parent,
                u.c,
                u.total,
                u.w
            );
        }
        s
    }

    /// FNV-1a hash of [`Self::dump`], identifying the tree in plan files.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.dump().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }

    /// Checks the structural invariants, returning the first violation.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invariant(m));
        if self.real_node_count() != 2 * self.n {
            return bad(format!("{} real nodes for {} variables", self.real_node_count(), self.n));
        }
        for u in &self.nodes {
            let sum = u.children.iter().map(|&c| self.nodes[c].total).fold(u.c, u64::saturating_add);
            match u.kind {
                NodeKind::Leaf(_) if u.total != 0 || !u.children.is_empty() => {
                    return bad(format!("leaf {} has cost or children", u.id))
                }
                NodeKind::Leaf(_) => {}
                _ if sum != u.total => return bad(format!("U({}) = {} but c + children = {sum}", u.id, u.total)),
                NodeKind::Dummy if u.c != 0 || u.w != 0 => return bad(format!("dummy {} has c or w", u.id)),
                _ => {}
            }
            if let Some(p) = u.parent {
                if !self.nodes[p].children.contains(&u.id) {
                    return bad(format!("node {} missing from its parent's children", u.id));
                }
                if !u.vars.iter().all(|v| self.nodes[p].vars.binary_search(v).is_ok()) {
                    return bad(format!("vars({}) not within vars of its parent", u.id));
                }
            } else if u.id != self.root {
                return bad(format!("node {} has no parent", u.id));
            }
        }
        if self.nodes[self.root].vars.len() != self.n {
            return bad("root does not eliminate every variable".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::EliminationOrder;
    use crate::model::fixtures::{survey, survey_ids::*};
    use crate::model::{Factor, Variable};

    fn survey_tree() -> EliminationTree {
        let net = survey();
        build_elimination_tree(&net, &EliminationOrder::given(&net, vec![A, S, T, E, O, R]).unwrap())
    }

    #[test]
    fn survey_tree_shape() {
        let t = survey_tree();
        t.check().unwrap();
        assert_eq!(t.len(), 12);
        let kids = |v: VarId| t.node(t.elim_node(v)).children.clone();
        assert_eq!(kids(A), vec![A, E]); // Pr(A), Pr(E|A,S)
        assert_eq!(kids(S), vec![S, t.elim_node(A)]);
        assert_eq!(kids(T), vec![T]);
        assert_eq!(kids(E), vec![O, R, t.elim_node(S)]);
        assert_eq!(t.node(t.elim_node(S)).scope_after, vec![E]);
        assert_eq!(t.node(t.elim_node(S)).vars, vec![A, S]);
        assert_eq!(t.root(), t.elim_node(R));
    }

    #[test]
    fn single_variable_tree() {
        let net = BayesianNetwork::new(
            vec![Variable::with_cardinality(0, "X", 1)],
            vec![vec![]],
            vec![Factor::new(vec![0], vec![1], vec![1.0]).unwrap()],
        )
        .unwrap();
        let t = build_elimination_tree(&net, &EliminationOrder::given(&net, vec![0]).unwrap());
        assert_eq!(t.len(), 2);
        assert_eq!((t.node(t.root()).c, t.node(t.root()).total), (2, 2));
    }

    #[test]
    fn forest_gets_virtual_root() {
        let vars = (0..2).map(|i| Variable::with_cardinality(i, format!("V{i}"), 2)).collect();
        let cpts = (0..2).map(|i| Factor::new(vec![i], vec![2], vec![0.5, 0.5]).unwrap()).collect();
        let net = BayesianNetwork::new(vars, vec![vec![]; 2], cpts).unwrap();
        let t = build_elimination_tree(&net, &EliminationOrder::given(&net, vec![0, 1]).unwrap());
        t.check().unwrap();
        assert_eq!(t.node(t.root()).kind, NodeKind::Virtual);
        assert_eq!(t.node(t.root()).c, 0);
        assert_eq!(t.node(t.root()).total, 8);
    }

    #[test]
    fn binarize_inserts_d_minus_two_dummies() {
        let t = survey_tree();
        let b = t.binarize();
        b.check().unwrap();
        assert!(b.is_binary());
        assert_eq!(b.len(), 13);
        for u in 0..t.len() {
            assert_eq!(t.node(u).total, b.node(u).total);
        }
        assert_eq!(t.binarize().binarize(), b);
    }

    #[test]
    fn dump_format() {
        let t = survey_tree();
        let first = t.dump().lines().next().unwrap().to_string();
        assert_eq!(first, "node 0 leaf 0 parent=6 c=0 U=0 w=3");
        assert!(t.dump().contains("node 11 internal 4 parent=- c=4 U="));
    }
}

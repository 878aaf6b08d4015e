use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::elimination::moral_graph;
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, VarId};

/// Greedy elimination-order heuristics. Declaration order is the tie-break
/// order of [`select_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heuristic {
    /// Fewest neighbours.
    MinNeighbors,
    /// Smallest product of neighbour cardinalities.
    MinWeight,
    /// Fewest fill edges.
    MinFill,
    /// Smallest sum of fill-edge weights, an edge weighing the product of its
    /// endpoint cardinalities.
    WeightedMinFill,
}

impl Heuristic {
    pub const ALL: [Heuristic; 4] =
        [Heuristic::MinNeighbors, Heuristic::MinWeight, Heuristic::MinFill, Heuristic::WeightedMinFill];

    pub fn short_name(self) -> &'static str {
        match self {
            Heuristic::MinNeighbors => "mn",
            Heuristic::MinWeight => "mw",
            Heuristic::MinFill => "mf",
            Heuristic::WeightedMinFill => "wmf",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Heuristic::ALL
            .into_iter()
            .find(|h| h.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::contract(format!("unknown heuristic `{s}` (expected mn, mw, mf or wmf)")))
    }
}

/// Table sizes induced by an order, in entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OrderStats {
    /// Average join table size over the elimination steps.
    pub avg: f64,
    /// Largest join table.
    pub max: f64,
    /// Average size of the factor each step leaves behind.
    pub created_avg: f64,
    pub created_max: f64,
}

impl OrderStats {
    fn record(&mut self, join: f64, card: usize) {
        self.avg += join;
        self.max = self.max.max(join);
        let created = join / card as f64;
        self.created_avg += created;
        self.created_max = self.created_max.max(created);
    }

    fn finish(&mut self, steps: usize) {
        self.avg /= steps.max(1) as f64;
        self.created_avg /= steps.max(1) as f64;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationOrder {
    pub order: Vec<VarId>,
    /// `None` for orders supplied by the caller.
    pub heuristic: Option<Heuristic>,
    pub stats: OrderStats,
}

impl EliminationOrder {
    /// Wraps a caller-supplied order, checking it is a permutation.
    pub fn given(net: &BayesianNetwork, order: Vec<VarId>) -> Result<Self> {
        let mut seen = vec![false; net.len()];
        if order.len() != net.len() {
            return Err(Error::contract(format!("order has {} variables, network {}", order.len(), net.len())));
        }
        for &v in &order {
            if v >= net.len() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::contract(format!("order is not a permutation (variable {v})")));
            }
        }
        let stats = order_stats(net, &order);
        Ok(EliminationOrder { order, heuristic: None, stats })
    }

    /// Position of each variable in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

struct Working<'a> {
    adj: Vec<BTreeSet<VarId>>,
    cards: &'a [usize],
}

impl Working<'_> {
    fn cost(&self, h: Heuristic, v: VarId) -> f64 {
        let ns = &self.adj[v];
        match h {
            Heuristic::MinNeighbors => ns.len() as f64,
            Heuristic::MinWeight => ns.iter().map(|&u| self.cards[u] as f64).product(),
            Heuristic::MinFill | Heuristic::WeightedMinFill => {
                let ns: Vec<VarId> = ns.iter().copied().collect();
                let mut total = 0.0;
                for (i, &a) in ns.iter().enumerate() {
                    for &b in &ns[i + 1..] {
                        if !self.adj[a].contains(&b) {
                            total += if h == Heuristic::MinFill { 1.0 } else { (self.cards[a] * self.cards[b]) as f64 };
                        }
                    }
                }
                total
            }
        }
    }

    fn join_size(&self, v: VarId) -> f64 {
        self.cards[v] as f64 * self.adj[v].iter().map(|&u| self.cards[u] as f64).product::<f64>()
    }

    /// Removes `v`, connecting its neighbours; returns them.
    fn eliminate(&mut self, v: VarId) -> Vec<VarId> {
        let ns: Vec<VarId> = std::mem::take(&mut self.adj[v]).into_iter().collect();
        for &a in &ns {
            self.adj[a].remove(&v);
        }
        for (i, &a) in ns.iter().enumerate() {
            for &b in &ns[i + 1..] {
                self.adj[a].insert(b);
                self.adj[b].insert(a);
            }
        }
        ns
    }
}

/// Join-table statistics induced by eliminating along `order`.
pub fn order_stats(net: &BayesianNetwork, order: &[VarId]) -> OrderStats {
    let cards = net.cardinalities();
    let g = moral_graph(net);
    let mut w = Working { adj: (0..net.len()).map(|v| g.neighbors(v).clone()).collect(), cards: &cards };
    let mut stats = OrderStats::default();
    for &v in order {
        stats.record(w.join_size(v), cards[v]);
        w.eliminate(v);
    }
    stats.finish(order.len());
    stats
}

/// Greedy order: repeatedly eliminate the cheapest remaining variable, ties
/// to the smallest id.
pub fn elimination_order(net: &BayesianNetwork, h: Heuristic) -> EliminationOrder {
    let n = net.len();
    let cards = net.cardinalities();
    let g = moral_graph(net);
    let mut w = Working { adj: (0..n).map(|v| g.neighbors(v).clone()).collect(), cards: &cards };
    let mut cost: Vec<f64> = (0..n).map(|v| w.cost(h, v)).collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut stats = OrderStats::default();
    let mut dirty = vec![false; n];
    for _ in 0..n {
        let mut best = usize::MAX;
        for v in 0..n {
            if alive[v] && (best == usize::MAX || cost[v] < cost[best]) {
                best = v;
            }
        }
        stats.record(w.join_size(best), cards[best]);
        alive[best] = false;
        order.push(best);
        let ns = w.eliminate(best);
        let mut touched = Vec::new();
        let second_ring = matches!(h, Heuristic::MinFill | Heuristic::WeightedMinFill);
        for &a in &ns {
            if !dirty[a] {
                dirty[a] = true;
                touched.push(a);
            }
            if second_ring {
                for &b in &w.adj[a] {
                    if !dirty[b] {
                        dirty[b] = true;
                        touched.push(b);
                    }
                }
            }
        }
        for v in touched {
            dirty[v] = false;
            cost[v] = w.cost(h, v);
        }
    }
    stats.finish(n);
    EliminationOrder { order, heuristic: Some(h), stats }
}

/// Runs every heuristic and keeps the smallest average join size, the maximum
/// breaking ties, then heuristic declaration order. Orders whose largest join
/// exceeds `cap` entries are discarded.
pub fn select_order(net: &BayesianNetwork, cap: u64) -> Result<EliminationOrder> {
    select_from(Heuristic::ALL.into_iter().map(|h| elimination_order(net, h)).collect(), cap)
}

pub(crate) fn select_from(candidates: Vec<EliminationOrder>, cap: u64) -> Result<EliminationOrder> {
    candidates
        .into_iter()
        .filter(|o| o.stats.max <= cap as f64)
        .reduce(|best, o| if (o.stats.avg, o.stats.max) < (best.stats.avg, best.stats.max) { o } else { best })
        .ok_or(Error::OrderExplosion { cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::survey;
    use crate::model::{Factor, Variable};

    fn zero_fill(net: &BayesianNetwork, order: &[VarId]) -> bool {
        let g = moral_graph(net);
        let cards = net.cardinalities();
        let mut w = Working { adj: (0..net.len()).map(|v| g.neighbors(v).clone()).collect(), cards: &cards };
        order.iter().all(|&v| {
            let fill = w.cost(Heuristic::MinFill, v);
            w.eliminate(v);
            fill == 0.0
        })
    }

    #[test]
    fn min_fill_on_survey_adds_no_edges() {
        let net = survey();
        let o = elimination_order(&net, Heuristic::MinFill);
        assert!(zero_fill(&net, &o.order));
    }

    #[test]
    fn simplicial_first() {
        // chain ends are simplicial, the middle is not
        let net = crate::model::fixtures::chain3();
        let o = elimination_order(&net, Heuristic::MinFill);
        assert_eq!(o.order[0], 0);
    }

    #[test]
    fn permutations_are_valid() {
        let net = survey();
        for h in Heuristic::ALL {
            let o = elimination_order(&net, h);
            let mut sorted = o.order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..6).collect::<Vec<_>>());
            assert_eq!(order_stats(&net, &o.order), o.stats);
        }
    }

    #[test]
    fn ties_pick_first_heuristic() {
        let vars = (0..3).map(|i| Variable::with_cardinality(i, format!("V{i}"), 2)).collect();
        let cpts = (0..3).map(|i| Factor::new(vec![i], vec![2], vec![0.5, 0.5]).unwrap()).collect();
        let net = BayesianNetwork::new(vars, vec![vec![]; 3], cpts).unwrap();
        assert_eq!(select_order(&net, 1 << 20).unwrap().heuristic, Some(Heuristic::MinNeighbors));
    }

    #[test]
    fn explosion_when_every_order_is_too_big() {
        assert!(matches!(select_order(&survey(), 4), Err(Error::OrderExplosion { cap: 4 })));
    }

    #[test]
    fn given_order_checks_permutation() {
        let net = survey();
        assert!(EliminationOrder::given(&net, vec![0, 1, 2, 3, 4, 4]).is_err());
        assert!(EliminationOrder::given(&net, vec![0, 1, 5, 2, 3, 4]).is_ok());
    }
}

//! Random network and query generators for property tests, benchmarks and
//! examples.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{BayesianNetwork, Factor, Query, Variable};

/// Shape parameters for [`random_network`].
#[derive(Debug, Clone, Copy)]
pub struct RandomNetworkSpec {
    pub variables: usize,
    pub max_cardinality: usize,
    pub max_parents: usize,
    /// Probability of adding each admissible edge before the parent cap.
    pub edge_probability: f64,
}

impl Default for RandomNetworkSpec {
    fn default() -> Self {
        RandomNetworkSpec { variables: 8, max_cardinality: 3, max_parents: 3, edge_probability: 0.4 }
    }
}

/// Random DAG over `spec.variables` variables with random CPTs. Variable ids
/// are a random relabelling of a topological order, so parents may have
/// larger ids than their children.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, spec: RandomNetworkSpec) -> BayesianNetwork {
    let n = spec.variables.max(1);
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=spec.max_cardinality.max(1))).collect();
    let mut parents = vec![Vec::new(); n];
    for pos in 1..n {
        let mut cands: Vec<usize> = (0..pos).collect();
        cands.shuffle(rng);
        for c in cands {
            if parents[label[pos]].len() >= spec.max_parents {
                break;
            }
            if rng.gen_bool(spec.edge_probability.clamp(0.0, 1.0)) {
                parents[label[pos]].push(label[c]);
            }
        }
    }
    let variables: Vec<Variable> = (0..n).map(|i| Variable::with_cardinality(i, format!("X{i}"), cards[i])).collect();
    let cpts = (0..n).map(|v| random_cpt(rng, v, &parents[v], &cards)).collect();
    BayesianNetwork::new(variables, parents, cpts).expect("generated network is valid")
}

fn random_cpt<R: Rng + ?Sized>(rng: &mut R, v: usize, parents: &[usize], cards: &[usize]) -> Factor {
    // layout (parents..., v), v fastest, so each consecutive run is one row
    let mut vars: Vec<usize> = parents.to_vec();
    vars.push(v);
    let cs: Vec<usize> = vars.iter().map(|&x| cards[x]).collect();
    let rows: usize = cs[..cs.len() - 1].iter().product();
    let mut values = Vec::with_capacity(rows * cards[v]);
    for _ in 0..rows {
        let raw: Vec<f64> = (0..cards[v]).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        values.extend(raw.iter().map(|x| x / sum));
    }
    Factor::from_layout(&vars, &cs, values).expect("generated cpt")
}

/// Random query: `free` free variables, `bound` bound ones with random
/// states, the rest summed out. Counts are clamped to the network size.
pub fn random_query<R: Rng + ?Sized>(rng: &mut R, net: &BayesianNetwork, free: usize, bound: usize) -> Query {
    let mut ids: Vec<usize> = (0..net.len()).collect();
    ids.shuffle(rng);
    let free = free.min(net.len());
    let bound = bound.min(net.len() - free);
    let f = ids[..free].iter().copied();
    let b = ids[free..free + bound].iter().map(|&v| (v, rng.gen_range(0..net.cardinality(v))));
    Query::new(f, b.collect::<Vec<_>>())
}

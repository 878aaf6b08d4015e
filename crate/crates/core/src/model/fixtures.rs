//! Small hand-built networks used across tests and examples.

use crate::model::{BayesianNetwork, Factor, Variable};

fn var(id: usize, name: &str, states: &[&str]) -> Variable {
    Variable::new(id, name, states.iter().map(|s| s.to_string()).collect())
}

fn cpt(vars: &[usize], cards: &[usize], values: &[f64]) -> Factor {
    Factor::from_layout(vars, cards, values.to_vec()).expect("fixture cpt")
}

/// Variable ids of [`survey`].
pub mod survey_ids {
    pub const A: usize = 0;
    pub const S: usize = 1;
    pub const E: usize = 2;
    pub const O: usize = 3;
    pub const R: usize = 4;
    pub const T: usize = 5;
}

/// The six-variable travel survey network: A→E, S→E, E→O, E→R, O→T, R→T.
pub fn survey() -> BayesianNetwork {
    use survey_ids::*;
    let variables = vec![
        var(A, "A", &["young", "adult", "old"]),
        var(S, "S", &["M", "F"]),
        var(E, "E", &["high", "uni"]),
        var(O, "O", &["emp", "self"]),
        var(R, "R", &["small", "big"]),
        var(T, "T", &["car", "train", "other"]),
    ];
    let parents = vec![vec![], vec![], vec![A, S], vec![E], vec![E], vec![O, R]];
    let cpts = vec![
        cpt(&[A], &[3], &[0.3, 0.5, 0.2]),
        cpt(&[S], &[2], &[0.6, 0.4]),
        // layout (A, S, E), E fastest
        cpt(&[A, S, E], &[3, 2, 2], &[0.75, 0.25, 0.64, 0.36, 0.72, 0.28, 0.7, 0.3, 0.88, 0.12, 0.9, 0.1]),
        cpt(&[E, O], &[2, 2], &[0.96, 0.04, 0.92, 0.08]),
        cpt(&[E, R], &[2, 2], &[0.25, 0.75, 0.2, 0.8]),
        // layout (O, R, T), T fastest
        cpt(&[O, R, T], &[2, 2, 3], &[0.48, 0.42, 0.10, 0.58, 0.24, 0.18, 0.56, 0.36, 0.08, 0.70, 0.21, 0.09]),
    ];
    BayesianNetwork::new(variables, parents, cpts).expect("survey fixture is valid")
}

/// Chain `A → B → C` of binary variables.
pub fn chain3() -> BayesianNetwork {
    let variables = vec![var(0, "A", &["a0", "a1"]), var(1, "B", &["b0", "b1"]), var(2, "C", &["c0", "c1"])];
    let parents = vec![vec![], vec![0], vec![1]];
    let cpts = vec![
        cpt(&[0], &[2], &[0.4, 0.6]),
        cpt(&[0, 1], &[2, 2], &[0.7, 0.3, 0.2, 0.8]),
        cpt(&[1, 2], &[2, 2], &[0.9, 0.1, 0.5, 0.5]),
    ];
    BayesianNetwork::new(variables, parents, cpts).expect("chain fixture is valid")
}

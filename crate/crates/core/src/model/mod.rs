//! Discrete Bayesian networks and the tabular factor algebra.

mod brute;
mod factor;
pub mod fixtures;
mod network;
mod query;
pub mod random;

pub use brute::{joint_brute_force, BruteForce, BRUTE_FORCE_CAP};
pub use factor::{table_size, Factor, DEFAULT_ENTRY_CAP};
pub use network::{validate_network, BayesianNetwork, Variable, NORMALIZATION_TOLERANCE};
pub use query::{parse_query_log, write_query_log, Query, Role};

/// Dense variable identifier, `0..n`.
pub type VarId = usize;

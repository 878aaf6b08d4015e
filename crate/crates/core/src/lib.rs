//! Exact inference for discrete Bayesian networks by variable elimination over
//! a fixed elimination tree, plus a workload-aware planner that chooses which
//! intermediate factors of that tree to precompute.
//!
//! The pieces, bottom-up:
//!
//! - [`model`]: networks, factors, queries and a brute-force oracle.
//! - [`parsers`]: BIF and the native line format, network statistics.
//! - [`elimination`]: moral graph, ordering heuristics, elimination trees.
//! - [`workload`]: query distributions reduced to per-node usefulness.
//! - [`planner`]: benefit, exact DP and greedy selection, materialization.
//! - [`engine`]: query answering that reuses materialized factors.
//! - [`lattice`]: redundancy-aware scheme over shrunk subnetworks.
//! - [`jtree`]: calibrated junction-tree baseline.
//! - [`cli`]: the `bnmat` command-line tool.

pub mod cli;
pub mod elimination;
pub mod engine;
pub mod error;
pub mod jtree;
pub mod lattice;
pub mod model;
pub mod parsers;
pub mod planner;
pub mod workload;

pub use error::{Error, Result, Violation};

//! Moral graphs, elimination orders and elimination trees.

mod moral;
mod order;
mod tree;

pub use moral::{moral_graph, MoralGraph};
pub use order::{elimination_order, order_stats, select_order, EliminationOrder, Heuristic, OrderStats};
pub use tree::{build_elimination_tree, EliminationTree, NodeId, NodeKind, TreeNode};

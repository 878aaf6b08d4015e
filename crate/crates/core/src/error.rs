use std::fmt;

use crate::model::VarId;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// A single problem found by [`crate::model::validate_network`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The parent relation contains a cycle through the listed variables.
    Cycle { vars: Vec<VarId> },
    /// The CPT of `var` is not over exactly `{var} ∪ parents(var)`.
    CptScope { var: VarId, expected: Vec<VarId>, found: Vec<VarId> },
    /// A CPT row does not sum to one.
    Normalization { var: VarId, parent_assignment: Vec<usize>, sum: f64 },
    /// State names of a variable are not unique.
    DuplicateState { var: VarId, state: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { vars } => write!(f, "cycle through variables {vars:?}"),
            Violation::CptScope { var, expected, found } => {
                write!(f, "cpt of variable {var} has scope {found:?}, expected {expected:?}")
            }
            Violation::Normalization { var, parent_assignment, sum } => {
                write!(f, "cpt row of variable {var} at parent assignment {parent_assignment:?} sums to {sum}")
            }
            Violation::DuplicateState { var, state } => {
                write!(f, "variable {var} has duplicate state {state:?}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("factor over scope {scope:?} needs {entries} entries, over the cap of {cap}")]
    SizeLimit { scope: Vec<VarId>, entries: f64, cap: u64 },

    #[error("size limit exceeded at tree node {node}: {source}")]
    NodeSizeLimit {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },

    #[error("line {line}: probability block for `{var}` has {found} entries, expected {expected}")]
    RowCount { line: usize, var: String, expected: usize, found: usize },

    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),

    #[error("every elimination heuristic exceeds the entry cap of {cap}")]
    OrderExplosion { cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. } | Error::UnknownVariable { .. } | Error::RowCount { .. } => 2,
            Error::Invalid(_) | Error::Contract(_) | Error::Invariant(_) => 3,
            Error::SizeLimit { .. } | Error::NodeSizeLimit { .. } | Error::OrderExplosion { .. } => 4,
            Error::Io(_) => 5,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

use std::fmt;

use thiserror::Error;

use crate::markov_tree::MarkovViolation;

/// Where in a tree a combination failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// Combining the evidence items entered at a node.
    Evidence(String),
    /// Computing the message on a directed edge.
    Edge { from: String, to: String },
    /// Computing the marginal at a node.
    Node(String),
    /// The global combination performed by the oracle.
    Global,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Evidence(n) => write!(f, "evidence at node `{n}`"),
            Location::Edge { from, to } => write!(f, "message `{from}` -> `{to}`"),
            Location::Node(n) => write!(f, "marginal at node `{n}`"),
            Location::Global => f.write_str("global combination"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frame must contain at least one element")]
    EmptyFrame,
    #[error("duplicate frame label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown frame label `{0}`")]
    UnknownLabel(String),
    #[error("frame has {size} elements, limit is {max}")]
    FrameTooLarge { size: usize, max: usize },
    #[error("operands belong to different frames")]
    FrameMismatch,

    #[error("partition block is empty")]
    EmptyBlock,
    #[error("partition blocks overlap")]
    OverlappingBlocks,
    #[error("partition blocks do not cover the frame")]
    IncompleteCover,
    #[error("operation needs at least one partition")]
    EmptyPartitionList,
    #[error("{0:?} is not a block of the node partition")]
    UnknownBlock(Vec<String>),
    #[error("subset must be nonempty")]
    EmptySubset,

    #[error("focal set must be nonempty")]
    EmptyFocalSet,
    #[error("mass {0} is not strictly positive")]
    NonPositiveMass(f64),
    #[error("focal set listed twice")]
    DuplicateFocal,
    #[error("masses sum to {0}, expected 1")]
    MassNotNormalized(f64),
    #[error("set function is not a belief function: {0}")]
    NotABeliefFunction(String),
    #[error("total conflict: the combined evidence is contradictory")]
    TotalConflict,
    #[error("total conflict detected at {0}")]
    TotalConflictAt(Location),
    #[error("operation needs at least one mass function")]
    EmptyMassList,

    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("self loop on node `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}` -- `{1}`")]
    DuplicateEdge(String, String),
    #[error("`{0}` -- `{1}` is not an edge")]
    NotAnEdge(String, String),
    #[error("node sets must be mutually disjoint")]
    OverlappingSets,
    #[error("network is not a tree")]
    NotATree,
    #[error("not a qualitative Markov tree: {0}")]
    MarkovViolation(Box<MarkovViolation>),

    #[error("inbound message `{from}` -> `{to}` is missing or stale")]
    MissingInbound { from: String, to: String },
    #[error("no propagation has run yet")]
    NoRunYet,
    #[error("hypothesis not satisfied: {0}")]
    HypothesisNotSatisfied(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for both located and unlocated total-conflict errors.
    pub fn is_total_conflict(&self) -> bool {
        matches!(self, Error::TotalConflict | Error::TotalConflictAt(_))
    }

    pub(crate) fn at(self, location: Location) -> Error {
        match self {
            Error::TotalConflict => Error::TotalConflictAt(location),
            other => other,
        }
    }
}

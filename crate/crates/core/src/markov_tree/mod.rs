//! Partition-labelled networks, trees, and the qualitative Markov condition.

mod network;
mod tree;

pub use network::Network;
pub use tree::{validate_markov, IncidenceKernel, MarkovCheck, MarkovReport, MarkovTree, MarkovViolation};

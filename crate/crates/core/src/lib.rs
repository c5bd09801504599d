//! Belief-function propagation in qualitative Markov trees.
//!
//! Independent items of evidence, each expressed on a small partition of a
//! common frame, are combined by local computation: Dempster's rule is
//! applied on one node's partition at a time and results travel along tree
//! edges as projected messages. The [`oracle`] module recomputes the same
//! marginals by a single global combination for verification.

pub mod belief_core;
pub mod error;
pub mod fixtures;
pub mod frame_algebra;
pub mod json;
pub mod markov_tree;
pub mod oracle;
pub mod propagation;

pub use belief_core::{BeliefValue, CombinationReport, MassFunction, EPS_CMP};
pub use error::{Error, Location, Result};
pub use frame_algebra::{meet, Frame, Partition, SubsetMask};
pub use markov_tree::{validate_markov, MarkovCheck, MarkovTree, Network};
pub use propagation::{Engine, FiringLog, Marginal};

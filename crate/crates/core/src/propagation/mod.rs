//! Local computation of node marginals by message passing.

mod concurrent;
mod engine;
mod log;

pub use engine::{Engine, Marginal};
pub use log::{FiringEvent, FiringLog, InputStamps, Rule};

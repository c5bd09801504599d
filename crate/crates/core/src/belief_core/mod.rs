//! Mass and belief functions, Dempster's rule, and moves between partitions.

mod mass;

pub use mass::{
    BeliefValue, CombinationReport, MassFunction, EPS_CMP, EPS_CONFLICT, EPS_DROP, EPS_MASS,
    MAX_MOBIUS_FRAME,
};

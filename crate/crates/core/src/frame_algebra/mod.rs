//! Frames, subsets, partitions and the partition lattice.

mod frame;
mod independence;
mod partition;

pub use frame::{iter_bits, iter_subsets, Frame, SubsetMask, DEFAULT_MAX_FRAME, MASK_BITS};
pub use independence::{
    cond_independence_witness, qualitatively_cond_independent, qualitatively_independent, Witness,
};
pub use partition::{meet, Partition};

use std::fmt;
use std::sync::Arc;

use super::frame::{iter_bits, Frame, SubsetMask};
use crate::error::{Error, Result};

/// Disjoint, nonempty blocks covering a frame.
///
/// Blocks are kept in canonical order (by smallest element index), so two
/// partitions with the same blocks are equal and serialize identically. A
/// partition doubles as a frame in its own right: [`Partition::coarse_frame`]
/// has one element per block, labelled `B0`, `B1`, ... in block order.
#[derive(Clone)]
pub struct Partition(Arc<PartitionInner>);

struct PartitionInner {
    frame: Frame,
    blocks: Vec<u64>,
    block_of: Vec<usize>,
    coarse: Frame,
}

impl Partition {
    pub fn new(frame: &Frame, blocks: Vec<SubsetMask>) -> Result<Partition> {
        let mut bits = Vec::with_capacity(blocks.len());
        for b in &blocks {
            frame.ensure_same(b.frame())?;
            bits.push(b.bits());
        }
        Partition::from_bits(frame, bits)
    }

    /// Builds a partition from blocks given as label lists.
    pub fn from_labels<B, L, S>(frame: &Frame, blocks: B) -> Result<Partition>
    where
        B: IntoIterator<Item = L>,
        L: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = Vec::new();
        for block in blocks {
            bits.push(frame.subset(block)?.bits());
        }
        Partition::from_bits(frame, bits)
    }

    pub fn from_bits(frame: &Frame, mut blocks: Vec<u64>) -> Result<Partition> {
        let full = frame.full_bits();
        let mut seen = 0u64;
        for &b in &blocks {
            if b & !full != 0 {
                return Err(Error::FrameMismatch);
            }
            if b == 0 {
                return Err(Error::EmptyBlock);
            }
            if seen & b != 0 {
                return Err(Error::OverlappingBlocks);
            }
            seen |= b;
        }
        if seen != full {
            return Err(Error::IncompleteCover);
        }
        blocks.sort_by_key(|b| b.trailing_zeros());
        Ok(Partition::from_canonical(frame, blocks))
    }

    fn from_canonical(frame: &Frame, blocks: Vec<u64>) -> Partition {
        let mut block_of = vec![0; frame.len()];
        for (bi, &b) in blocks.iter().enumerate() {
            for e in iter_bits(b) {
                block_of[e] = bi;
            }
        }
        let coarse = Frame::coarse(frame, &blocks);
        Partition(Arc::new(PartitionInner { frame: frame.clone(), blocks, block_of, coarse }))
    }

    /// The one-block partition `{Θ}`, top of the lattice.
    pub fn trivial(frame: &Frame) -> Partition {
        Partition::from_canonical(frame, vec![frame.full_bits()])
    }

    /// The partition into singletons, bottom of the lattice.
    pub fn discrete(frame: &Frame) -> Partition {
        Partition::from_canonical(frame, (0..frame.len()).map(|i| 1u64 << i).collect())
    }

    pub fn frame(&self) -> &Frame {
        &self.0.frame
    }

    /// The frame whose elements are this partition's blocks.
    pub fn coarse_frame(&self) -> &Frame {
        &self.0.coarse
    }

    pub fn len(&self) -> usize {
        self.0.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn blocks(&self) -> &[u64] {
        &self.0.blocks
    }

    pub fn block(&self, i: usize) -> SubsetMask {
        self.frame().subset_from_bits(self.0.blocks[i]).expect("block in frame")
    }

    /// Index of the block containing frame element `element`.
    pub fn block_of(&self, element: usize) -> usize {
        self.0.block_of[element]
    }

    /// Block-index mask of the blocks meeting `bits`.
    pub fn touching_bits(&self, bits: u64) -> u64 {
        iter_bits(bits).fold(0u64, |acc, e| acc | 1 << self.0.block_of[e])
    }

    /// Union, in the underlying frame, of the blocks selected by `block_set`.
    pub fn union_bits(&self, block_set: u64) -> u64 {
        iter_bits(block_set).fold(0u64, |acc, bi| acc | self.0.blocks[bi])
    }

    /// True iff `bits` is a union of blocks, i.e. lies in the field `℘*`.
    pub fn contains_union(&self, bits: u64) -> bool {
        self.union_bits(self.touching_bits(bits)) == bits
    }

    /// The blocks meeting `s`, as a subset of the coarse frame.
    pub fn blocks_touching(&self, s: &SubsetMask) -> Result<SubsetMask> {
        self.frame().ensure_same(s.frame())?;
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        self.coarse_frame().subset_from_bits(self.touching_bits(s.bits()))
    }

    /// Union of a coarse-frame subset, as a subset of the underlying frame.
    pub fn union_of(&self, block_set: &SubsetMask) -> Result<SubsetMask> {
        self.coarse_frame().ensure_same(block_set.frame())?;
        self.frame().subset_from_bits(self.union_bits(block_set.bits()))
    }

    /// Labels of each block, in canonical order.
    pub fn block_labels(&self) -> Vec<Vec<&str>> {
        self.0.blocks.iter().map(|&b| self.frame().labels_of(b)).collect()
    }

    /// `self ≥ other`: every block of `other` lies inside a block of `self`.
    pub fn is_coarser(&self, other: &Partition) -> Result<bool> {
        self.frame().ensure_same(other.frame())?;
        Ok(other.blocks().iter().all(|&b| self.touching_bits(b).count_ones() == 1))
    }

    /// `self > other`: coarser and distinct.
    pub fn is_strictly_coarser(&self, other: &Partition) -> Result<bool> {
        Ok(self.is_coarser(other)? && self != other)
    }

    /// Coarsest common refinement of `self` and `other`.
    pub fn meet_with(&self, other: &Partition) -> Result<Partition> {
        self.frame().ensure_same(other.frame())?;
        let mut blocks = Vec::new();
        for &p in self.blocks() {
            for &q in other.blocks() {
                if p & q != 0 {
                    blocks.push(p & q);
                }
            }
        }
        blocks.sort_by_key(|b| b.trailing_zeros());
        Ok(Partition::from_canonical(self.frame(), blocks))
    }

    /// Incidence of this partition's blocks on `other`'s: row `r` is the
    /// block-index mask of the blocks of `other` meeting block `r`.
    pub fn incidence(&self, other: &Partition) -> Result<Vec<u64>> {
        self.frame().ensure_same(other.frame())?;
        Ok(self.blocks().iter().map(|&b| other.touching_bits(b)).collect())
    }
}

/// Coarsest common refinement `℘₁ ∧ … ∧ ℘ₙ`.
pub fn meet(parts: &[Partition]) -> Result<Partition> {
    let (first, rest) = parts.split_first().ok_or(Error::EmptyPartitionList)?;
    rest.iter().try_fold(first.clone(), |acc, p| acc.meet_with(p))
}

impl PartialEq for Partition {
    fn eq(&self, other: &Partition) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.frame == other.0.frame && self.0.blocks == other.0.blocks)
    }
}

impl Eq for Partition {}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.block_labels().into_iter().map(|b| format!("{{{}}}", b.join(","))).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

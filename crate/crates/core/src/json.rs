//! JSON shapes for frames, partitions, mass functions and evidence.
//!
//! Subsets are written as label arrays in frame order. Coarse-frame subsets
//! are written as arrays of blocks, each block a label array.

use serde::{Deserialize, Serialize};

use crate::belief_core::MassFunction;
use crate::error::{Error, Result};
use crate::frame_algebra::{iter_bits, Frame, Partition};
use crate::markov_tree::Network;

/// Significant digits kept when numbers are written out.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

pub fn frame_to_json(frame: &Frame) -> Vec<String> {
    frame.labels().to_vec()
}

pub fn partition_to_json(p: &Partition) -> Vec<Vec<String>> {
    p.block_labels()
        .into_iter()
        .map(|b| b.into_iter().map(String::from).collect())
        .collect()
}

pub fn partition_from_json(frame: &Frame, blocks: &[Vec<String>]) -> Result<Partition> {
    Partition::from_labels(frame, blocks)
}

/// One focal set of a mass function on a full frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocalEntry {
    pub subset: Vec<String>,
    pub mass: f64,
}

/// Focal sets in canonical order, masses rounded for output.
pub fn mass_to_json(m: &MassFunction) -> Vec<FocalEntry> {
    m.focal_sets()
        .into_iter()
        .map(|(s, v)| FocalEntry {
            subset: s.labels().into_iter().map(String::from).collect(),
            mass: round_sig(v),
        })
        .collect()
}

pub fn mass_from_json(frame: &Frame, entries: &[FocalEntry]) -> Result<MassFunction> {
    MassFunction::from_labels(frame, entries.iter().map(|e| (&e.subset, e.mass)))
}

/// One focal block set of a mass function on a node partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFocal {
    pub blocks: Vec<Vec<String>>,
    pub mass: f64,
}

/// Labels of each block selected by `block_set`.
pub fn block_set_to_json(p: &Partition, block_set: u64) -> Vec<Vec<String>> {
    iter_bits(block_set)
        .map(|bi| p.frame().labels_of(p.blocks()[bi]).into_iter().map(String::from).collect())
        .collect()
}

/// Parses a list of blocks back to a block-set mask. Each listed block must
/// be exactly one block of `p` (label order within a block is free).
pub fn block_set_from_json(p: &Partition, blocks: &[Vec<String>]) -> Result<u64> {
    let mut set = 0u64;
    for b in blocks {
        let bits = p.frame().subset(b)?.bits();
        let bi = p
            .blocks()
            .iter()
            .position(|&blk| blk == bits)
            .ok_or_else(|| Error::UnknownBlock(b.clone()))?;
        set |= 1 << bi;
    }
    Ok(set)
}

pub fn coarse_mass_to_json(p: &Partition, m: &MassFunction) -> Vec<BlockFocal> {
    let mut v: Vec<(u64, f64)> = m.focal_bits().iter().map(|(&b, &x)| (b, x)).collect();
    v.sort_by_key(|&(b, _)| (b.count_ones(), b));
    v.into_iter()
        .map(|(b, x)| BlockFocal { blocks: block_set_to_json(p, b), mass: round_sig(x) })
        .collect()
}

pub fn coarse_mass_from_json(p: &Partition, entries: &[BlockFocal]) -> Result<MassFunction> {
    let bits = entries
        .iter()
        .map(|e| Ok((block_set_from_json(p, &e.blocks)?, e.mass)))
        .collect::<Result<Vec<_>>>()?;
    MassFunction::from_bits(p.coarse_frame(), bits)
}

/// An item of evidence for one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceDoc {
    pub node: String,
    pub mass: Vec<BlockFocal>,
}

impl EvidenceDoc {
    pub fn new(p: &Partition, node: &str, m: &MassFunction) -> EvidenceDoc {
        EvidenceDoc { node: node.to_string(), mass: coarse_mass_to_json(p, m) }
    }

    /// Resolves the node in `net` and builds the mass function on its
    /// partition.
    pub fn to_mass(&self, net: &Network) -> Result<MassFunction> {
        let p = net.partition(net.index_of(&self.node)?);
        coarse_mass_from_json(p, &self.mass)
    }
}

/// An evidence file holds one item or a list of items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvidenceFile {
    One(EvidenceDoc),
    Many(Vec<EvidenceDoc>),
}

impl EvidenceFile {
    pub fn into_items(self) -> Vec<EvidenceDoc> {
        match self {
            EvidenceFile::One(d) => vec![d],
            EvidenceFile::Many(v) => v,
        }
    }
}

//! Qualitative independence and qualitative conditional independence.
//!
//! Both tests enumerate block selections directly. Node partitions are
//! expected to be small, so no cleverer algorithm is used; the search does
//! prune as soon as a partial intersection becomes empty.

use super::partition::Partition;
use crate::error::{Error, Result};

/// A block selection showing that conditional independence fails.
///
/// `given_block` indexes the conditioning partition and `selection[i]`
/// indexes partition `i`. Each selected block meets the given block, yet
/// their joint intersection is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub given_block: usize,
    pub selection: Vec<usize>,
}

/// `[℘₁, …, ℘ₙ] ⊣`: every choice of one block per partition has a
/// nonempty intersection.
pub fn qualitatively_independent(parts: &[Partition]) -> Result<bool> {
    let first = parts.first().ok_or(Error::EmptyPartitionList)?;
    qualitatively_cond_independent(parts, &Partition::trivial(first.frame()))
}

/// `[℘₁, …, ℘ₙ] ⊣ ℘`.
pub fn qualitatively_cond_independent(parts: &[Partition], given: &Partition) -> Result<bool> {
    Ok(cond_independence_witness(parts, given)?.is_none())
}

/// Searches for a selection violating `[℘₁, …, ℘ₙ] ⊣ ℘`; `None` means
/// the relation holds.
pub fn cond_independence_witness(
    parts: &[Partition],
    given: &Partition,
) -> Result<Option<Witness>> {
    for p in parts {
        given.frame().ensure_same(p.frame())?;
    }
    for (gi, &g) in given.blocks().iter().enumerate() {
        // Only blocks meeting the conditioning block pass the filter.
        let candidates: Vec<Vec<usize>> = parts
            .iter()
            .map(|p| iter_meeting(p, g).collect())
            .collect();
        let mut selection = Vec::with_capacity(parts.len());
        if let Some(sel) = search(parts, &candidates, g, &mut selection) {
            return Ok(Some(Witness { given_block: gi, selection: sel }));
        }
    }
    Ok(None)
}

fn iter_meeting(p: &Partition, bits: u64) -> impl Iterator<Item = usize> + '_ {
    p.blocks().iter().enumerate().filter(move |(_, &b)| b & bits != 0).map(|(i, _)| i)
}

fn search(
    parts: &[Partition],
    candidates: &[Vec<usize>],
    acc: u64,
    selection: &mut Vec<usize>,
) -> Option<Vec<usize>> {
    let depth = selection.len();
    if acc == 0 {
        // Any completion stays empty; every partition has a candidate
        // because some block meets the conditioning block.
        let mut sel = selection.clone();
        sel.extend(candidates[depth..].iter().map(|c| c[0]));
        return Some(sel);
    }
    if depth == parts.len() {
        return None;
    }
    for &bi in &candidates[depth] {
        selection.push(bi);
        let found = search(parts, candidates, acc & parts[depth].blocks()[bi], selection);
        selection.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

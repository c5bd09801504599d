use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on frame size. Focal-set enumeration is exponential in it.
pub const DEFAULT_MAX_FRAME: usize = 24;

/// Hard cap imposed by the 64-bit subset representation.
pub const MASK_BITS: usize = 64;

/// A finite, ordered set of mutually exclusive answers.
///
/// Element order is fixed at creation and defines bit positions. Frames
/// compare by content: two frames built from the same labels interoperate.
/// The coarse frame of a partition additionally remembers the partition it
/// was built from, so block-index frames of different partitions never mix.
#[derive(Clone)]
pub struct Frame(Arc<FrameInner>);

struct FrameInner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    origin: Option<Origin>,
}

#[derive(PartialEq)]
struct Origin {
    frame: Frame,
    blocks: Vec<u64>,
}

impl Frame {
    /// Builds a frame with the default size cap.
    pub fn new<I, S>(labels: I) -> Result<Frame>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Frame::with_limit(labels, DEFAULT_MAX_FRAME)
    }

    /// Builds a frame allowing up to `max` elements (never more than 64).
    pub fn with_limit<I, S>(labels: I, max: usize) -> Result<Frame>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let max = max.min(MASK_BITS);
        if labels.is_empty() {
            return Err(Error::EmptyFrame);
        }
        if labels.len() > max {
            return Err(Error::FrameTooLarge { size: labels.len(), max });
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Frame(Arc::new(FrameInner { labels, index, origin: None })))
    }

    pub(crate) fn coarse(parent: &Frame, blocks: &[u64]) -> Frame {
        let labels: Vec<String> = (0..blocks.len()).map(|i| format!("B{i}")).collect();
        let index = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        Frame(Arc::new(FrameInner {
            labels,
            index,
            origin: Some(Origin { frame: parent.clone(), blocks: blocks.to_vec() }),
        }))
    }

    pub fn len(&self) -> usize {
        self.0.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.0
            .index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// True when this frame is the block-index frame of some partition.
    pub fn is_coarse(&self) -> bool {
        self.0.origin.is_some()
    }

    /// Bit mask with one bit per element.
    pub fn full_bits(&self) -> u64 {
        full_bits(self.len())
    }

    pub fn full(&self) -> SubsetMask {
        SubsetMask { frame: self.clone(), bits: self.full_bits() }
    }

    pub fn empty(&self) -> SubsetMask {
        SubsetMask { frame: self.clone(), bits: 0 }
    }

    pub fn singleton(&self, i: usize) -> SubsetMask {
        assert!(i < self.len(), "element index {i} out of range");
        SubsetMask { frame: self.clone(), bits: 1 << i }
    }

    pub fn subset<I, S>(&self, labels: I) -> Result<SubsetMask>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u64;
        for l in labels {
            bits |= 1 << self.index_of(l.as_ref())?;
        }
        Ok(SubsetMask { frame: self.clone(), bits })
    }

    /// Wraps raw bits, rejecting bits beyond the frame width.
    pub fn subset_from_bits(&self, bits: u64) -> Result<SubsetMask> {
        if bits & !self.full_bits() != 0 {
            return Err(Error::FrameMismatch);
        }
        Ok(SubsetMask { frame: self.clone(), bits })
    }

    /// Labels of the elements in `bits`, in frame order.
    pub fn labels_of(&self, bits: u64) -> Vec<&str> {
        iter_bits(bits).map(|i| self.label(i)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &Frame) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Frame) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.labels == other.0.labels && self.0.origin == other.0.origin)
    }
}

impl Eq for Frame {}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame{:?}", self.0.labels)
    }
}

pub(crate) fn full_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates the set bit positions of `bits` in increasing order.
pub fn iter_bits(mut bits: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if bits == 0 {
            None
        } else {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        }
    })
}

/// Iterates every subset of `bits`, including `bits` itself and the empty set.
pub fn iter_subsets(bits: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(bits);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & bits) };
        Some(cur)
    })
}

/// A subset of a specific frame.
#[derive(Clone, PartialEq, Eq)]
pub struct SubsetMask {
    frame: Frame,
    bits: u64,
}

impl SubsetMask {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn union(&self, other: &SubsetMask) -> Result<SubsetMask> {
        self.frame.ensure_same(&other.frame)?;
        Ok(self.with_bits(self.bits | other.bits))
    }

    pub fn intersection(&self, other: &SubsetMask) -> Result<SubsetMask> {
        self.frame.ensure_same(&other.frame)?;
        Ok(self.with_bits(self.bits & other.bits))
    }

    pub fn difference(&self, other: &SubsetMask) -> Result<SubsetMask> {
        self.frame.ensure_same(&other.frame)?;
        Ok(self.with_bits(self.bits & !other.bits))
    }

    pub fn complement(&self) -> SubsetMask {
        self.with_bits(!self.bits & self.frame.full_bits())
    }

    pub fn is_subset(&self, other: &SubsetMask) -> Result<bool> {
        self.frame.ensure_same(&other.frame)?;
        Ok(self.bits & !other.bits == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn cardinality(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        iter_bits(self.bits)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.frame.labels_of(self.bits)
    }

    fn with_bits(&self, bits: u64) -> SubsetMask {
        SubsetMask { frame: self.frame.clone(), bits }
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels().join(","))
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

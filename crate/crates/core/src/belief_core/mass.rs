use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::frame_algebra::{iter_subsets, Frame, Partition, SubsetMask};

/// Tolerance on `Σ m = 1` when a mass function is constructed.
pub const EPS_MASS: f64 = 1e-9;
/// Normalization constants at or below this are treated as total conflict.
pub const EPS_CONFLICT: f64 = 1e-12;
/// Default per-mass tolerance when comparing mass functions.
pub const EPS_CMP: f64 = 1e-9;
/// Masses below this are ignored when comparing focal structure.
pub const EPS_DROP: f64 = 1e-12;
/// Largest frame accepted by [`MassFunction::from_belief_table`].
pub const MAX_MOBIUS_FRAME: usize = 16;

/// Distribution of a random nonempty subset over its focal elements.
///
/// Focal sets are nonempty, masses strictly positive and summing to one.
/// Zero-mass entries are never stored.
#[derive(Clone, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: BTreeMap<u64, f64>,
}

/// A degree of belief in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BeliefValue(f64);

impl BeliefValue {
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Result of Dempster's rule together with the mass lost to conflict.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationReport {
    pub result: MassFunction,
    pub conflict_mass: f64,
}

impl MassFunction {
    /// The vacuous belief function: all mass on the whole frame.
    pub fn vacuous(frame: &Frame) -> MassFunction {
        MassFunction { frame: frame.clone(), focal: BTreeMap::from([(frame.full_bits(), 1.0)]) }
    }

    pub fn new<I>(frame: &Frame, entries: I) -> Result<MassFunction>
    where
        I: IntoIterator<Item = (SubsetMask, f64)>,
    {
        let mut bits = Vec::new();
        for (s, m) in entries {
            frame.ensure_same(s.frame())?;
            bits.push((s.bits(), m));
        }
        MassFunction::from_bits(frame, bits)
    }

    /// Builds a mass function from `(labels, mass)` pairs.
    pub fn from_labels<I, L, S>(frame: &Frame, entries: I) -> Result<MassFunction>
    where
        I: IntoIterator<Item = (L, f64)>,
        L: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = Vec::new();
        for (labels, m) in entries {
            bits.push((frame.subset(labels)?.bits(), m));
        }
        MassFunction::from_bits(frame, bits)
    }

    pub fn from_bits<I>(frame: &Frame, entries: I) -> Result<MassFunction>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let full = frame.full_bits();
        let mut focal = BTreeMap::new();
        let mut total = 0.0;
        for (bits, m) in entries {
            if bits & !full != 0 {
                return Err(Error::FrameMismatch);
            }
            if bits == 0 {
                return Err(Error::EmptyFocalSet);
            }
            if m.is_nan() || m <= 0.0 || m.is_infinite() {
                return Err(Error::NonPositiveMass(m));
            }
            if focal.insert(bits, m).is_some() {
                return Err(Error::DuplicateFocal);
            }
            total += m;
        }
        if (total - 1.0).abs() > EPS_MASS {
            return Err(Error::MassNotNormalized(total));
        }
        Ok(MassFunction { frame: frame.clone(), focal })
    }

    pub(crate) fn from_map(frame: &Frame, focal: BTreeMap<u64, f64>) -> MassFunction {
        debug_assert!(focal.keys().all(|&b| b != 0));
        MassFunction { frame: frame.clone(), focal }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Focal sets as raw bit masks with their masses, in mask order.
    pub fn focal_bits(&self) -> &BTreeMap<u64, f64> {
        &self.focal
    }

    /// Focal sets in canonical order: by cardinality, then by mask.
    pub fn focal_sets(&self) -> Vec<(SubsetMask, f64)> {
        let mut v: Vec<(u64, f64)> = self.focal.iter().map(|(&b, &m)| (b, m)).collect();
        v.sort_by_key(|&(b, _)| (b.count_ones(), b));
        v.into_iter()
            .map(|(b, m)| (self.frame.subset_from_bits(b).expect("focal set in frame"), m))
            .collect()
    }

    pub fn num_focal(&self) -> usize {
        self.focal.len()
    }

    /// Mass of exactly the subset `bits` (zero if not focal).
    pub fn mass_of(&self, bits: u64) -> f64 {
        self.focal.get(&bits).copied().unwrap_or(0.0)
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal.contains_key(&self.frame.full_bits())
    }

    /// `Bel(A) = Σ { m(S) : S ⊆ A }`.
    pub fn belief_of(&self, a: &SubsetMask) -> Result<BeliefValue> {
        self.frame.ensure_same(a.frame())?;
        Ok(BeliefValue(self.belief_bits(a.bits())))
    }

    pub fn belief_bits(&self, a: u64) -> f64 {
        // Fold from +0.0: an empty `sum()` yields -0.0.
        let sum = self.focal.iter().filter(|(&s, _)| s & !a == 0).fold(0.0, |acc, (_, &m)| acc + m);
        sum.clamp(0.0, 1.0)
    }

    /// `Bel` on every subset, indexed by mask. Frames up to 16 elements.
    pub fn belief_table(&self) -> Result<Vec<f64>> {
        let n = self.frame.len();
        if n > MAX_MOBIUS_FRAME {
            return Err(Error::FrameTooLarge { size: n, max: MAX_MOBIUS_FRAME });
        }
        Ok((0..1u64 << n).map(|a| self.belief_bits(a)).collect())
    }

    /// Inverts a belief table (indexed by mask) back to masses:
    /// `m(A) = Σ_{B ⊆ A} (−1)^{|A∖B|} Bel(B)`.
    pub fn from_belief_table(frame: &Frame, table: &[f64]) -> Result<MassFunction> {
        let n = frame.len();
        if n > MAX_MOBIUS_FRAME {
            return Err(Error::FrameTooLarge { size: n, max: MAX_MOBIUS_FRAME });
        }
        if table.len() != 1 << n {
            return Err(Error::NotABeliefFunction(format!(
                "table has {} entries, expected {}",
                table.len(),
                1u64 << n
            )));
        }
        if table[0].abs() > EPS_MASS {
            return Err(Error::NotABeliefFunction("Bel(∅) must be 0".into()));
        }
        let mut focal = BTreeMap::new();
        for a in 1..table.len() as u64 {
            let m: f64 = iter_subsets(a)
                .map(|b| {
                    let sign = if (a & !b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    sign * table[b as usize]
                })
                .sum();
            if m < -EPS_MASS {
                return Err(Error::NotABeliefFunction(format!(
                    "negative mass {m} on {}",
                    frame.subset_from_bits(a)?
                )));
            }
            if m > EPS_MASS {
                focal.insert(a, m);
            }
        }
        let total: f64 = focal.values().sum();
        if (total - 1.0).abs() > EPS_MASS {
            return Err(Error::NotABeliefFunction(format!("masses sum to {total}")));
        }
        Ok(MassFunction::from_map(frame, focal))
    }

    /// Dempster's rule of combination (orthogonal sum).
    pub fn combine(&self, other: &MassFunction) -> Result<CombinationReport> {
        self.frame.ensure_same(&other.frame)?;
        let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
        let mut conflict = 0.0;
        let mut kept = 0.0;
        for (&s1, &m1) in &self.focal {
            for (&s2, &m2) in &other.focal {
                let p = m1 * m2;
                let s = s1 & s2;
                if s == 0 {
                    conflict += p;
                } else {
                    *acc.entry(s).or_insert(0.0) += p;
                    kept += p;
                }
            }
        }
        if kept <= EPS_CONFLICT {
            return Err(Error::TotalConflict);
        }
        // `kept` rather than `1 - conflict` keeps the result normalized even
        // when the inputs carry rounding error.
        if kept != 1.0 {
            for m in acc.values_mut() {
                *m /= kept;
            }
        }
        Ok(CombinationReport {
            result: MassFunction::from_map(&self.frame, acc),
            conflict_mass: conflict / (conflict + kept),
        })
    }

    /// `Bel₁ ⊕ … ⊕ Belₙ`, folded left with renormalization at each step.
    /// The reported conflict satisfies `1 − K = Π (1 − K_step)`.
    pub fn combine_many(ms: &[MassFunction]) -> Result<CombinationReport> {
        let (first, rest) = ms.split_first().ok_or(Error::EmptyMassList)?;
        for m in rest {
            first.frame.ensure_same(&m.frame)?;
        }
        let mut result = first.clone();
        let mut kept = 1.0;
        for m in rest {
            let step = result.combine(m)?;
            kept *= 1.0 - step.conflict_mass;
            result = step.result;
        }
        Ok(CombinationReport { result, conflict_mass: 1.0 - kept })
    }

    /// True iff every focal set is a union of blocks of `p`.
    pub fn is_carried_by(&self, p: &Partition) -> Result<bool> {
        self.frame.ensure_same(p.frame())?;
        Ok(self.focal.keys().all(|&s| p.contains_union(s)))
    }

    /// The coarsest partition carrying this mass function: elements are
    /// grouped when they lie in exactly the same focal sets.
    pub fn associated_partition(&self) -> Partition {
        let mut blocks = vec![self.frame.full_bits()];
        for &s in self.focal.keys() {
            blocks = blocks
                .into_iter()
                .flat_map(|b| [b & s, b & !s])
                .filter(|&b| b != 0)
                .collect();
        }
        Partition::from_bits(&self.frame, blocks).expect("refinement of a partition")
    }

    /// Coarsening to `p`: `Bel_℘(B) = Bel(∪B)`. Each focal set is sent to
    /// the set of blocks it touches.
    pub fn coarsen(&self, p: &Partition) -> Result<MassFunction> {
        self.frame.ensure_same(p.frame())?;
        let mut acc = BTreeMap::new();
        for (&s, &m) in &self.focal {
            *acc.entry(p.touching_bits(s)).or_insert(0.0) += m;
        }
        Ok(MassFunction::from_map(p.coarse_frame(), acc))
    }

    /// Vacuous extension from the coarse frame of `p` to `p`'s frame.
    pub fn vacuous_extend(&self, p: &Partition) -> Result<MassFunction> {
        self.frame.ensure_same(p.coarse_frame())?;
        let focal = self.focal.iter().map(|(&b, &m)| (p.union_bits(b), m)).collect();
        Ok(MassFunction::from_map(p.frame(), focal))
    }

    /// Projection from the coarse frame of `from` to the coarse frame of
    /// `to`, computed through the block incidence of the two partitions.
    pub fn project(&self, from: &Partition, to: &Partition) -> Result<MassFunction> {
        self.frame.ensure_same(from.coarse_frame())?;
        let rows = from.incidence(to)?;
        Ok(self.project_rows(&rows, to.coarse_frame()))
    }

    /// Projection through precomputed incidence rows.
    pub(crate) fn project_rows(&self, rows: &[u64], target: &Frame) -> MassFunction {
        let mut acc = BTreeMap::new();
        for (&b, &m) in &self.focal {
            let image = crate::frame_algebra::iter_bits(b).fold(0u64, |acc, i| acc | rows[i]);
            *acc.entry(image).or_insert(0.0) += m;
        }
        MassFunction::from_map(target, acc)
    }

    /// Largest absolute mass difference over the union of focal sets.
    pub fn max_deviation(&self, other: &MassFunction) -> Result<f64> {
        self.frame.ensure_same(&other.frame)?;
        let mut dev: f64 = 0.0;
        for (&s, &m) in &self.focal {
            dev = dev.max((m - other.mass_of(s)).abs());
        }
        for (&s, &m) in &other.focal {
            if !self.focal.contains_key(&s) {
                dev = dev.max(m);
            }
        }
        Ok(dev)
    }

    /// Same focal sets (ignoring masses below [`EPS_DROP`]) with masses
    /// within `eps` of each other.
    pub fn approx_eq(&self, other: &MassFunction, eps: f64) -> bool {
        if self.frame != other.frame {
            return false;
        }
        let support = |m: &MassFunction| -> Vec<u64> {
            m.focal.iter().filter(|(_, &v)| v >= EPS_DROP).map(|(&b, _)| b).collect()
        };
        support(self) == support(other)
            && self.max_deviation(other).map(|d| d <= eps).unwrap_or(false)
    }

    /// Same focal sets, ignoring the masses.
    pub fn same_focal_structure(&self, other: &MassFunction) -> bool {
        self.frame == other.frame && self.focal.keys().eq(other.focal.keys())
    }
}

impl fmt::Debug for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.focal_sets().iter().map(|(s, m)| format!("{s}:{m}")).collect();
        write!(f, "m[{}]", parts.join(", "))
    }
}

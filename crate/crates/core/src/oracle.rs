//! Brute-force global computation for verifying local propagation.
//!
//! The oracle combines every node's evidence on the full frame and coarsens
//! the result to each node partition. It is exponential in the frame size
//! and guarded by a hard cap; it exists for desk-scale verification only.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::belief_core::MassFunction;
use crate::error::{Error, Location, Result};
use crate::frame_algebra::{meet, qualitatively_cond_independent, Partition};
use crate::markov_tree::{validate_markov, MarkovTree, Network};
use crate::propagation::Engine;

/// Default cap on the global frame size.
pub const DEFAULT_ORACLE_MAX_FRAME: usize = 16;

#[derive(Debug, Clone)]
pub struct GlobalResult {
    /// `⊕ Bel_i` on the full frame.
    pub global: MassFunction,
    /// Coarsening of `global` to each node partition, keyed by node id.
    pub per_node: BTreeMap<String, MassFunction>,
    pub conflict_mass: f64,
}

fn check_cap(tree: &Network, max_frame: usize) -> Result<()> {
    let size = tree.frame().len();
    if size > max_frame {
        return Err(Error::FrameTooLarge { size, max: max_frame });
    }
    Ok(())
}

/// Lifts `(node, mass)` items to the full frame, checking each against the
/// node's coarse frame.
fn lift<'a, I>(tree: &Network, evidence: I) -> Result<Vec<MassFunction>>
where
    I: IntoIterator<Item = (&'a str, &'a MassFunction)>,
{
    let mut lifted = vec![MassFunction::vacuous(tree.frame())];
    for (node, m) in evidence {
        let p = tree.partition(tree.index_of(node)?);
        lifted.push(m.vacuous_extend(p)?);
    }
    Ok(lifted)
}

/// `Bel^T = ⊕ Bel_i` on the full frame, coarsened to every node.
pub fn global_combine<'a, I>(tree: &MarkovTree, evidence: I, max_frame: usize) -> Result<GlobalResult>
where
    I: IntoIterator<Item = (&'a str, &'a MassFunction)>,
{
    check_cap(tree, max_frame)?;
    let lifted = lift(tree, evidence)?;
    let report = MassFunction::combine_many(&lifted).map_err(|e| e.at(Location::Global))?;
    let per_node = tree
        .ids()
        .iter()
        .zip(tree.partitions())
        .map(|(id, p)| Ok((id.clone(), report.result.coarsen(p)?)))
        .collect::<Result<_>>()?;
    Ok(GlobalResult { global: report.result, per_node, conflict_mass: report.conflict_mass })
}

/// Same as [`global_combine`] but combining on the coarse frame of the meet
/// of all node partitions instead of the full frame.
pub fn global_combine_on_meet<'a, I>(
    tree: &MarkovTree,
    evidence: I,
    max_frame: usize,
) -> Result<BTreeMap<String, MassFunction>>
where
    I: IntoIterator<Item = (&'a str, &'a MassFunction)>,
{
    check_cap(tree, max_frame)?;
    let finest = meet(tree.partitions())?;
    let mut on_meet = vec![MassFunction::vacuous(finest.coarse_frame())];
    for m in lift(tree, evidence)? {
        on_meet.push(m.coarsen(&finest)?);
    }
    let combined = MassFunction::combine_many(&on_meet).map_err(|e| e.at(Location::Global))?;
    tree.ids()
        .iter()
        .zip(tree.partitions())
        .map(|(id, p)| Ok((id.clone(), combined.result.project(&finest, p)?)))
        .collect()
}

/// Runs [`global_combine`] on the evidence entered into `engine`.
pub fn global_combine_engine(engine: &Engine, max_frame: usize) -> Result<GlobalResult> {
    let tree = engine.tree();
    let mut items = Vec::new();
    for id in tree.ids() {
        for m in engine.evidence_items(id)? {
            items.push((id.as_str(), m));
        }
    }
    global_combine(tree, items, max_frame)
}

/// Per-node comparison of engine marginals against the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalCheckReport {
    pub deviations: BTreeMap<String, f64>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Propagates `engine` if needed and compares each node marginal with the
/// oracle coarsening. The tree must satisfy the qualitative Markov
/// condition; otherwise the check is not applicable.
pub fn check_marginals(engine: &mut Engine, tol: f64, max_frame: usize) -> Result<MarginalCheckReport> {
    if !engine.tree().markov_validated() {
        if let Some(v) = validate_markov(engine.tree())?.violation {
            return Err(Error::HypothesisNotSatisfied(v.to_string()));
        }
    }
    let oracle = global_combine_engine(engine, max_frame)?;
    if engine.marginals().is_err() {
        engine.propagate_batch()?;
    }
    let mut deviations = BTreeMap::new();
    for m in engine.marginals()? {
        let dev = m.mass.max_deviation(&oracle.per_node[&m.node])?;
        deviations.insert(m.node, dev);
    }
    let max_deviation = deviations.values().copied().fold(0.0, f64::max);
    Ok(MarginalCheckReport { deviations, max_deviation, tol, pass: max_deviation <= tol })
}

/// Outcome of a single identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub deviation: f64,
    pub pass: bool,
}

fn compare(lhs: Result<MassFunction>, rhs: Result<MassFunction>, tol: f64) -> Result<IdentityReport> {
    let deviation = match (lhs, rhs) {
        (Ok(l), Ok(r)) => l.max_deviation(&r)?,
        // Both sides undefined: the identity holds vacuously.
        (Err(a), Err(b)) if a.is_total_conflict() && b.is_total_conflict() => 0.0,
        (Err(e), _) | (_, Err(e)) if !e.is_total_conflict() => return Err(e),
        _ => f64::INFINITY,
    };
    Ok(IdentityReport { deviation, pass: deviation <= tol })
}

fn require_carried(m: &MassFunction, p: &Partition, name: &str) -> Result<()> {
    if !m.is_carried_by(p)? {
        return Err(Error::HypothesisNotSatisfied(format!("{name} is not carried by its partition")));
    }
    Ok(())
}

fn require_cond_independent(p1: &Partition, p2: &Partition, given: &Partition) -> Result<()> {
    if !qualitatively_cond_independent(&[p1.clone(), p2.clone()], given)? {
        return Err(Error::HypothesisNotSatisfied(
            "partitions are not conditionally independent given the target".into(),
        ));
    }
    Ok(())
}

/// With `bel1` carried by `p1`, `bel2` by `p2` and `[p1, p2] ⊣ p`, checks
/// that combining then coarsening to `p` equals coarsening then combining.
/// Mass functions live on the full frame.
pub fn check_combination_commutes_with_coarsening(
    p1: &Partition,
    p2: &Partition,
    p: &Partition,
    bel1: &MassFunction,
    bel2: &MassFunction,
    tol: f64,
) -> Result<IdentityReport> {
    require_cond_independent(p1, p2, p)?;
    require_carried(bel1, p1, "first belief function")?;
    require_carried(bel2, p2, "second belief function")?;
    let lhs = bel1.combine(bel2).and_then(|r| r.result.coarsen(p));
    let rhs = bel1.coarsen(p)?.combine(&bel2.coarsen(p)?).map(|r| r.result);
    compare(lhs, rhs, tol)
}

/// With `bel2` carried by `p2` and `[p1, p2] ⊣ p`, checks that coarsening
/// straight to `p1` equals coarsening to `p` and projecting on to `p1`.
pub fn check_projection_through(
    p1: &Partition,
    p2: &Partition,
    p: &Partition,
    bel2: &MassFunction,
    tol: f64,
) -> Result<IdentityReport> {
    require_cond_independent(p1, p2, p)?;
    require_carried(bel2, p2, "belief function")?;
    let lhs = bel2.coarsen(p1);
    let rhs = bel2.coarsen(p)?.project(p, p1);
    compare(lhs, rhs, tol)
}

/// The qualitative Markov network definition checked directly: for all
/// mutually disjoint `J₁, J₂, J₃` with `J₃` separating `J₁` from `J₂`,
/// `[∧J₁, ∧J₂] ⊣ ∧J₃` (the empty meet being `{Θ}`). Enumerates `4^|J|`
/// assignments, so only for small networks.
pub fn is_markov_by_separation(net: &Network) -> Result<bool> {
    let n = net.len();
    let meet_of = |set: &BTreeSet<usize>| -> Result<Partition> {
        if set.is_empty() {
            return Ok(Partition::trivial(net.frame()));
        }
        let parts: Vec<Partition> = set.iter().map(|&i| net.partition(i).clone()).collect();
        meet(&parts)
    };
    for code in 0..4usize.pow(n as u32) {
        let mut sets = [BTreeSet::new(), BTreeSet::new(), BTreeSet::new()];
        let mut c = code;
        for node in 0..n {
            if c % 4 > 0 {
                sets[c % 4 - 1].insert(node);
            }
            c /= 4;
        }
        let [j1, j2, j3] = &sets;
        if j1.is_empty() || j2.is_empty() || !net.separates_idx(j1, j2, j3) {
            continue;
        }
        if !qualitatively_cond_independent(&[meet_of(j1)?, meet_of(j2)?], &meet_of(j3)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

use std::collections::{BTreeMap, HashMap};

use super::log::{FiringLog, InputStamps, Rule};
use crate::belief_core::MassFunction;
use crate::error::{Error, Location, Result};
use crate::frame_algebra::Partition;
use crate::markov_tree::{MarkovCheck, MarkovTree, Network};

/// Stamps of the inputs a stored result was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Inputs {
    pub evidence: u64,
    /// `(neighbor, stamp of neighbor → self)` in neighbor order.
    pub inbound: Vec<(usize, u64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Message {
    pub mass: MassFunction,
    pub stamp: u64,
    pub inputs: Inputs,
}

#[derive(Debug, Clone)]
pub(crate) struct MarginalRecord {
    pub mass: MassFunction,
    pub inputs: Inputs,
}

#[derive(Debug, Clone)]
struct NodeEvidence {
    items: Vec<MassFunction>,
    combined: MassFunction,
    stamp: u64,
}

/// The combined belief on one node's partition after propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub node: String,
    pub partition: Partition,
    /// Mass function on the coarse frame of `partition`.
    pub mass: MassFunction,
}

impl Marginal {
    /// Belief in the union of the blocks selected by `block_set`.
    pub fn belief(&self, block_set: u64) -> f64 {
        self.mass.belief_bits(block_set)
    }

    /// Belief of every block set, indexed by block-set mask.
    pub fn belief_table(&self) -> Vec<f64> {
        (0..1u64 << self.partition.len()).map(|b| self.belief(b)).collect()
    }
}

/// Local-computation engine over a qualitative Markov tree.
///
/// Evidence is entered per node; messages and marginals are cached with the
/// version stamps of the inputs they were computed from. A cached result is
/// current when every input stamp still matches, so rules never re-fire on
/// an unchanged instantiation.
#[derive(Debug, Clone)]
pub struct Engine {
    pub(crate) tree: MarkovTree,
    evidence: Vec<NodeEvidence>,
    pub(crate) messages: BTreeMap<(usize, usize), Message>,
    pub(crate) marginals: Vec<Option<MarginalRecord>>,
    pub(crate) clock: u64,
    last_log: Option<FiringLog>,
}

/// Memoized currentness of directed-edge messages.
pub(crate) type Currentness = HashMap<(usize, usize), bool>;

impl Engine {
    /// An engine with vacuous evidence everywhere and no messages.
    pub fn new(tree: MarkovTree) -> Engine {
        let evidence = (0..tree.len())
            .map(|i| NodeEvidence {
                items: Vec::new(),
                combined: MassFunction::vacuous(tree.partition(i).coarse_frame()),
                stamp: 0,
            })
            .collect();
        let marginals = vec![None; tree.len()];
        Engine { tree, evidence, messages: BTreeMap::new(), marginals, clock: 0, last_log: None }
    }

    /// Builds the tree from a network, validating it according to `check`.
    pub fn from_network(net: Network, check: MarkovCheck) -> Result<Engine> {
        Ok(Engine::new(MarkovTree::new(net, check)?))
    }

    pub fn tree(&self) -> &MarkovTree {
        &self.tree
    }

    /// Number of directed-edge message slots, `2(|J| − 1)`.
    pub fn num_message_slots(&self) -> usize {
        2 * self.tree.edges().len()
    }

    /// Number of slots currently holding a message, current or not.
    pub fn num_messages_stored(&self) -> usize {
        self.messages.len()
    }

    pub fn evidence_items(&self, node: &str) -> Result<&[MassFunction]> {
        Ok(&self.evidence[self.tree.index_of(node)?].items)
    }

    /// Combination of all evidence entered at `node` (vacuous if none).
    pub fn local_evidence(&self, node: &str) -> Result<&MassFunction> {
        Ok(&self.evidence[self.tree.index_of(node)?].combined)
    }

    pub(crate) fn evidence_idx(&self, node: usize) -> (&MassFunction, u64) {
        let ev = &self.evidence[node];
        (&ev.combined, ev.stamp)
    }

    pub(crate) fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Adds an item of evidence at `node`. The mass function must live on
    /// the coarse frame of the node's partition.
    pub fn enter_evidence(&mut self, node: &str, m: MassFunction) -> Result<()> {
        let n = self.tree.index_of(node)?;
        self.tree.partition(n).coarse_frame().ensure_same(m.frame())?;
        let combined = self.evidence[n]
            .combined
            .combine(&m)
            .map_err(|e| e.at(Location::Evidence(node.to_string())))?
            .result;
        let stamp = self.tick();
        let ev = &mut self.evidence[n];
        ev.items.push(m);
        ev.combined = combined;
        ev.stamp = stamp;
        Ok(())
    }

    /// Drops all evidence at `node`. Every message derived from it becomes
    /// stale and is recomputed from scratch on the next propagation.
    pub fn clear_evidence(&mut self, node: &str) -> Result<()> {
        let n = self.tree.index_of(node)?;
        let stamp = self.tick();
        let ev = &mut self.evidence[n];
        ev.items.clear();
        ev.combined = MassFunction::vacuous(self.tree.partition(n).coarse_frame());
        ev.stamp = stamp;
        Ok(())
    }

    pub(crate) fn is_current(&self, from: usize, to: usize, memo: &mut Currentness) -> bool {
        if let Some(&c) = memo.get(&(from, to)) {
            return c;
        }
        let current = match self.messages.get(&(from, to)) {
            None => false,
            Some(msg) => self.inputs_match(from, &msg.inputs, memo),
        };
        memo.insert((from, to), current);
        current
    }

    fn inputs_match(&self, node: usize, inputs: &Inputs, memo: &mut Currentness) -> bool {
        inputs.evidence == self.evidence[node].stamp
            && inputs.inbound.iter().all(|&(k, stamp)| {
                self.is_current(k, node, memo) && self.messages[&(k, node)].stamp == stamp
            })
    }

    pub(crate) fn marginal_current(&self, node: usize, memo: &mut Currentness) -> bool {
        match &self.marginals[node] {
            None => false,
            Some(rec) => self.inputs_match(node, &rec.inputs, memo),
        }
    }

    /// Every directed edge `(from, to)` in canonical order.
    pub(crate) fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> =
            self.tree.edges().iter().flat_map(|&(i, j)| [(i, j), (j, i)]).collect();
        v.sort_unstable();
        v
    }

    fn first_missing(
        &self,
        node: usize,
        except: Option<usize>,
        memo: &mut Currentness,
    ) -> Option<usize> {
        self.tree
            .neighbors(node)
            .iter()
            .copied()
            .filter(|&k| Some(k) != except)
            .find(|&k| !self.is_current(k, node, memo))
    }

    fn rule1_enabled(&self, from: usize, to: usize, memo: &mut Currentness) -> bool {
        !self.is_current(from, to, memo) && self.first_missing(from, Some(to), memo).is_none()
    }

    fn rule2_enabled(&self, node: usize, memo: &mut Currentness) -> bool {
        self.first_missing(node, None, memo).is_none() && !self.marginal_current(node, memo)
    }

    /// `Bel_node ⊕ (⊕ inbound messages)`, skipping the message from `except`.
    fn gather(&self, node: usize, except: Option<usize>) -> Result<(MassFunction, Inputs)> {
        let (ev, stamp) = self.evidence_idx(node);
        let mut inbound = Vec::new();
        let mut parts = vec![ev.clone()];
        for &k in self.tree.neighbors(node) {
            if Some(k) == except {
                continue;
            }
            let msg = &self.messages[&(k, node)];
            inbound.push((k, msg.stamp));
            parts.push(msg.mass.clone());
        }
        let combined = MassFunction::combine_many(&parts)?.result;
        Ok((combined, Inputs { evidence: stamp, inbound }))
    }

    fn fire_message(&mut self, from: usize, to: usize) -> Result<Inputs> {
        let loc = || Location::Edge {
            from: self.tree.id(from).to_string(),
            to: self.tree.id(to).to_string(),
        };
        let (combined, inputs) = self.gather(from, Some(to)).map_err(|e| e.at(loc()))?;
        let kernel = self.tree.kernel_idx(from, to).expect("edge kernel");
        let mass = combined.project_rows(kernel.rows(), self.tree.partition(to).coarse_frame());
        let stamp = self.tick();
        self.messages.insert((from, to), Message { mass, stamp, inputs: inputs.clone() });
        Ok(inputs)
    }

    fn fire_marginal(&mut self, node: usize) -> Result<Inputs> {
        let (mass, inputs) = self
            .gather(node, None)
            .map_err(|e| e.at(Location::Node(self.tree.id(node).to_string())))?;
        self.marginals[node] = Some(MarginalRecord { mass, inputs: inputs.clone() });
        Ok(inputs)
    }

    pub(crate) fn stamps_view(&self, inputs: &Inputs) -> InputStamps {
        InputStamps {
            evidence: inputs.evidence,
            inbound: inputs
                .inbound
                .iter()
                .map(|&(k, s)| (self.tree.id(k).to_string(), s))
                .collect(),
        }
    }

    /// Computes `Bel_{from→to}`: the combination on `℘_from` of its evidence
    /// with every inbound message except the one from `to`, projected onto
    /// `℘_to`. Returns the stored message unchanged if it is already current.
    pub fn compute_message(&mut self, from: &str, to: &str) -> Result<MassFunction> {
        let (j, i) = (self.tree.index_of(from)?, self.tree.index_of(to)?);
        if !self.tree.is_edge(j, i) {
            return Err(Error::NotAnEdge(from.into(), to.into()));
        }
        let mut memo = Currentness::new();
        if let Some(k) = self.first_missing(j, Some(i), &mut memo) {
            return Err(Error::MissingInbound { from: self.tree.id(k).into(), to: from.into() });
        }
        if !self.is_current(j, i, &mut memo) {
            self.fire_message(j, i)?;
        }
        Ok(self.messages[&(j, i)].mass.clone())
    }

    /// The marginal `Bel^T` coarsened to `℘_node`. Every inbound message
    /// must be current; see [`Engine::query`] for the propagating variant.
    pub fn marginal(&mut self, node: &str) -> Result<Marginal> {
        let n = self.tree.index_of(node)?;
        let mut memo = Currentness::new();
        if let Some(k) = self.first_missing(n, None, &mut memo) {
            return Err(Error::MissingInbound { from: self.tree.id(k).into(), to: node.into() });
        }
        if !self.marginal_current(n, &mut memo) {
            self.fire_marginal(n)?;
        }
        Ok(self.marginal_view(n))
    }

    /// Propagates whatever is stale, then returns the marginal at `node`.
    pub fn query(&mut self, node: &str) -> Result<Marginal> {
        self.tree.index_of(node)?;
        let mut memo = Currentness::new();
        let stale = (0..self.tree.len()).any(|n| !self.marginal_current(n, &mut memo));
        if stale {
            self.propagate_batch()?;
        }
        self.marginal(node)
    }

    pub(crate) fn marginal_view(&self, n: usize) -> Marginal {
        Marginal {
            node: self.tree.id(n).to_string(),
            partition: self.tree.partition(n).clone(),
            mass: self.marginals[n].as_ref().expect("marginal computed").mass.clone(),
        }
    }

    /// Marginals at every node, in node order. Requires a completed
    /// propagation.
    pub fn marginals(&mut self) -> Result<Vec<Marginal>> {
        let ids = self.tree.ids().to_vec();
        ids.iter().map(|id| self.marginal(id)).collect()
    }

    /// Forward-chaining run to quiescence. Each sweep fires every enabled
    /// message rule in canonical edge order, then every enabled marginal
    /// rule in node order. On total conflict the engine is left exactly as
    /// it was before the call.
    pub fn propagate_batch(&mut self) -> Result<FiringLog> {
        let messages = self.messages.clone();
        let marginals = self.marginals.clone();
        let clock = self.clock;
        match self.run_batch() {
            Ok(log) => {
                self.last_log = Some(log.clone());
                Ok(log)
            }
            Err(e) => {
                self.messages = messages;
                self.marginals = marginals;
                self.clock = clock;
                Err(e)
            }
        }
    }

    fn run_batch(&mut self) -> Result<FiringLog> {
        let mut log = FiringLog::default();
        let edges = self.directed_edges();
        loop {
            let mut memo = Currentness::new();
            let rule1: Vec<(usize, usize)> =
                edges.iter().copied().filter(|&(j, i)| self.rule1_enabled(j, i, &mut memo)).collect();
            for &(j, i) in &rule1 {
                let inputs = self.fire_message(j, i)?;
                let stamps = self.stamps_view(&inputs);
                log.push(Rule::Message, self.tree.id(j), Some(self.tree.id(i)), stamps);
            }
            let mut memo = Currentness::new();
            let rule2: Vec<usize> =
                (0..self.tree.len()).filter(|&n| self.rule2_enabled(n, &mut memo)).collect();
            for &n in &rule2 {
                let inputs = self.fire_marginal(n)?;
                let stamps = self.stamps_view(&inputs);
                log.push(Rule::Marginal, self.tree.id(n), None, stamps);
            }
            if rule1.is_empty() && rule2.is_empty() {
                return Ok(log);
            }
        }
    }

    /// Same quiescent state as [`Engine::propagate_batch`], reached by
    /// simulated node processors that talk only through directed-edge
    /// registers. `schedule_seed` drives the interleaving.
    pub fn propagate_concurrent(&mut self, schedule_seed: u64) -> Result<FiringLog> {
        let log = super::concurrent::run(self, schedule_seed)?;
        self.last_log = Some(log.clone());
        Ok(log)
    }

    /// Log of the most recent propagation run.
    pub fn firing_trace(&self) -> Result<&FiringLog> {
        self.last_log.as_ref().ok_or(Error::NoRunYet)
    }

    /// Replaces a stored message without touching its stamps, so it still
    /// looks current, and drops the cached marginal at its target.
    #[doc(hidden)]
    pub fn overwrite_message_for_testing(
        &mut self,
        from: &str,
        to: &str,
        mass: MassFunction,
    ) -> Result<()> {
        let (j, i) = (self.tree.index_of(from)?, self.tree.index_of(to)?);
        let msg = self
            .messages
            .get_mut(&(j, i))
            .ok_or_else(|| Error::MissingInbound { from: from.into(), to: to.into() })?;
        msg.mass = mass;
        self.marginals[i] = None;
        Ok(())
    }
}

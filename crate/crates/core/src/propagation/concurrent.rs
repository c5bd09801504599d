//! Simulated node processors.
//!
//! Each processor owns its node's evidence and marginal and communicates
//! only through single-writer, single-reader registers, one per directed
//! edge. A seeded scheduler repeatedly picks a processor that has work it is
//! authorized to do and lets it perform one computation. Nothing is written
//! back to the engine unless the whole run succeeds.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::engine::{Currentness, Engine, Inputs, MarginalRecord, Message};
use super::log::{FiringLog, Rule};
use crate::belief_core::MassFunction;
use crate::error::{Location, Result};
use crate::frame_algebra::Frame;

#[derive(Clone, Copy, Debug)]
enum Action {
    /// Write the message to `neighbors[pos]`.
    Send(usize),
    /// Compute the node marginal.
    Output,
}

struct Route {
    register: usize,
    rows: Vec<u64>,
    target: Frame,
}

struct Processor {
    node: usize,
    neighbors: Vec<usize>,
    /// Register index of `neighbors[pos] → node`.
    inbound: Vec<usize>,
    /// Per neighbor, the outgoing register and projection kernel.
    routes: Vec<Route>,
    evidence: MassFunction,
    evidence_stamp: u64,
    marginal: Option<MarginalRecord>,
    fired: u64,
}

impl Processor {
    fn inbound_present(&self, registers: &[Option<Message>], except: Option<usize>) -> bool {
        self.inbound
            .iter()
            .enumerate()
            .all(|(pos, &r)| Some(pos) == except || registers[r].is_some())
    }

    fn inputs(&self, registers: &[Option<Message>], except: Option<usize>) -> Inputs {
        Inputs {
            evidence: self.evidence_stamp,
            inbound: self
                .inbound
                .iter()
                .enumerate()
                .filter(|&(pos, _)| Some(pos) != except)
                .map(|(pos, &r)| {
                    (self.neighbors[pos], registers[r].as_ref().expect("inbound present").stamp)
                })
                .collect(),
        }
    }

    fn actions(&self, registers: &[Option<Message>]) -> Vec<Action> {
        let mut out: Vec<Action> = (0..self.neighbors.len())
            .filter(|&pos| {
                registers[self.routes[pos].register].is_none()
                    && self.inbound_present(registers, Some(pos))
            })
            .map(Action::Send)
            .collect();
        if self.inbound_present(registers, None) {
            let stale = match &self.marginal {
                None => true,
                Some(rec) => rec.inputs != self.inputs(registers, None),
            };
            if stale {
                out.push(Action::Output);
            }
        }
        out
    }

    fn combine(&self, registers: &[Option<Message>], except: Option<usize>) -> Result<MassFunction> {
        let mut parts = vec![self.evidence.clone()];
        for (pos, &r) in self.inbound.iter().enumerate() {
            if Some(pos) != except {
                parts.push(registers[r].as_ref().expect("inbound present").mass.clone());
            }
        }
        Ok(MassFunction::combine_many(&parts)?.result)
    }
}

pub(super) fn run(engine: &mut Engine, seed: u64) -> Result<FiringLog> {
    let tree = &engine.tree;
    let n = tree.len() as u64;
    let edges = engine.directed_edges();
    let slot: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(s, &e)| (e, s)).collect();

    let mut memo = Currentness::new();
    let mut registers: Vec<Option<Message>> = edges
        .iter()
        .map(|&(j, i)| {
            engine.is_current(j, i, &mut memo).then(|| engine.messages[&(j, i)].clone())
        })
        .collect();

    let mut processors: Vec<Processor> = (0..tree.len())
        .map(|node| {
            let neighbors = tree.neighbors(node).to_vec();
            let (ev, stamp) = engine.evidence_idx(node);
            Processor {
                node,
                inbound: neighbors.iter().map(|&k| slot[&(k, node)]).collect(),
                routes: neighbors
                    .iter()
                    .map(|&k| Route {
                        register: slot[&(node, k)],
                        rows: tree.kernel_idx(node, k).expect("edge kernel").rows().to_vec(),
                        target: tree.partition(k).coarse_frame().clone(),
                    })
                    .collect(),
                neighbors,
                evidence: ev.clone(),
                evidence_stamp: stamp,
                marginal: engine.marginals[node].clone(),
                fired: 0,
            }
        })
        .collect();

    let clock_base = engine.clock;
    let mut max_stamp = clock_base;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = FiringLog::default();

    loop {
        let ready: Vec<(usize, Vec<Action>)> = processors
            .iter()
            .enumerate()
            .map(|(p, proc_)| (p, proc_.actions(&registers)))
            .filter(|(_, a)| !a.is_empty())
            .collect();
        let Some((p, actions)) = ready.choose(&mut rng) else { break };
        let action = *actions.choose(&mut rng).expect("nonempty");
        let proc_ = &mut processors[*p];
        let id = tree.id(proc_.node);
        match action {
            Action::Send(pos) => {
                let to = proc_.neighbors[pos];
                let loc = || Location::Edge { from: id.to_string(), to: tree.id(to).to_string() };
                let combined = proc_.combine(&registers, Some(pos)).map_err(|e| e.at(loc()))?;
                let route = &proc_.routes[pos];
                let mass = combined.project_rows(&route.rows, &route.target);
                let inputs = proc_.inputs(&registers, Some(pos));
                // Disjoint stamp sequences per processor; no shared counter.
                let stamp = clock_base + proc_.fired * n + proc_.node as u64 + 1;
                proc_.fired += 1;
                max_stamp = max_stamp.max(stamp);
                log.push(Rule::Message, id, Some(tree.id(to)), engine.stamps_view(&inputs));
                registers[route.register] = Some(Message { mass, stamp, inputs });
            }
            Action::Output => {
                let mass = proc_
                    .combine(&registers, None)
                    .map_err(|e| e.at(Location::Node(id.to_string())))?;
                let inputs = proc_.inputs(&registers, None);
                log.push(Rule::Marginal, id, None, engine.stamps_view(&inputs));
                proc_.marginal = Some(MarginalRecord { mass, inputs });
            }
        }
    }

    for (s, reg) in registers.into_iter().enumerate() {
        if let Some(msg) = reg {
            engine.messages.insert(edges[s], msg);
        }
    }
    for proc_ in processors {
        engine.marginals[proc_.node] = proc_.marginal;
    }
    engine.clock = max_stamp;
    Ok(log)
}

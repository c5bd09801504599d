use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::frame_algebra::{Frame, Partition};

/// Undirected network whose nodes carry partitions of one frame.
///
/// Node ids are strings; internally nodes are indexed in sorted id order and
/// edges are stored as `(min, max)` index pairs, so iteration order is
/// deterministic.
#[derive(Debug, Clone)]
pub struct Network {
    frame: Frame,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    partitions: Vec<Partition>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Network {
    pub fn new<N, E, S>(frame: &Frame, nodes: N, edges: E) -> Result<Network>
    where
        N: IntoIterator<Item = (S, Partition)>,
        E: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut nodes: Vec<(String, Partition)> =
            nodes.into_iter().map(|(id, p)| (id.into(), p)).collect();
        nodes.sort_by(|a, b| a.0.cmp(&b.0));
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, (id, p)) in nodes.iter().enumerate() {
            frame.ensure_same(p.frame())?;
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateNode(id.clone()));
            }
        }
        let (ids, partitions): (Vec<String>, Vec<Partition>) = nodes.into_iter().unzip();

        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| Error::UnknownNode(id.into()));
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b): (String, String) = (a.into(), b.into());
            let (i, j) = (lookup(&a)?, lookup(&b)?);
            if i == j {
                return Err(Error::SelfLoop(a));
            }
            if !edge_set.insert((i.min(j), i.max(j))) {
                return Err(Error::DuplicateEdge(a, b));
            }
        }
        let mut adjacency = vec![Vec::new(); ids.len()];
        for &(i, j) in &edge_set {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Network {
            frame: frame.clone(),
            ids,
            index,
            partitions,
            edges: edge_set.into_iter().collect(),
            adjacency,
        })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Node ids in index order (sorted).
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn partition(&self, node: usize) -> &Partition {
        &self.partitions[node]
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// Edges as `(min, max)` index pairs, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Nodes with exactly one neighbor.
    pub fn leaves(&self) -> Vec<&str> {
        (0..self.len()).filter(|&i| self.adjacency[i].len() == 1).map(|i| self.id(i)).collect()
    }

    /// Connected and acyclic.
    pub fn is_tree(&self) -> bool {
        !self.is_empty()
            && self.edges.len() == self.len() - 1
            && self.reachable(0, &BTreeSet::new()).len() == self.len()
    }

    /// Nodes reachable from `start` without entering `blocked`.
    pub(crate) fn reachable(&self, start: usize, blocked: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &k in &self.adjacency[n] {
                if !blocked.contains(&k) && seen.insert(k) {
                    queue.push_back(k);
                }
            }
        }
        seen
    }

    /// True iff every path from `j1` to `j2` passes through `j3`.
    pub fn separates(&self, j1: &[&str], j2: &[&str], j3: &[&str]) -> Result<bool> {
        let to_set = |ids: &[&str]| -> Result<BTreeSet<usize>> {
            ids.iter().map(|id| self.index_of(id)).collect()
        };
        let (a, b, c) = (to_set(j1)?, to_set(j2)?, to_set(j3)?);
        if !a.is_disjoint(&b) || !a.is_disjoint(&c) || !b.is_disjoint(&c) {
            return Err(Error::OverlappingSets);
        }
        Ok(self.separates_idx(&a, &b, &c))
    }

    pub(crate) fn separates_idx(
        &self,
        j1: &BTreeSet<usize>,
        j2: &BTreeSet<usize>,
        j3: &BTreeSet<usize>,
    ) -> bool {
        j1.iter().all(|&s| self.reachable(s, j3).is_disjoint(j2))
    }

    /// The node sets left after deleting `node`, one per neighbor, in
    /// neighbor order.
    pub fn subtree_components(&self, node: &str) -> Result<Vec<Vec<String>>> {
        let n = self.index_of(node)?;
        Ok(self
            .components_idx(n)
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.ids[i].clone()).collect())
            .collect())
    }

    pub(crate) fn components_idx(&self, node: usize) -> Vec<BTreeSet<usize>> {
        let blocked = BTreeSet::from([node]);
        self.adjacency[node].iter().map(|&k| self.reachable(k, &blocked)).collect()
    }
}

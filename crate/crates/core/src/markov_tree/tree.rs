use std::collections::HashMap;
use std::fmt;

use super::network::Network;
use crate::error::{Error, Result};
use crate::frame_algebra::{cond_independence_witness, meet, Partition};

/// Whether [`MarkovTree::new`] checks the qualitative Markov condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkovCheck {
    #[default]
    Validate,
    Skip,
}

/// A failed node-local Markov condition with the offending block selection.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovViolation {
    /// The node whose condition fails.
    pub node: String,
    /// Node ids of each subtree hanging off `node`.
    pub components: Vec<Vec<String>>,
    /// The block of the node's partition used as conditioning block.
    pub given_block: Vec<String>,
    /// One block per component (of that component's meet), each meeting
    /// `given_block`, whose joint intersection is empty.
    pub selection: Vec<Vec<String>>,
}

impl fmt::Display for MarkovViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition fails at node `{}`: blocks {:?} each meet {:?} but not jointly",
            self.node, self.selection, self.given_block
        )
    }
}

/// Outcome of [`validate_markov`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovReport {
    pub ok: bool,
    pub violation: Option<MarkovViolation>,
}

/// Checks, at every node `j`, that the meets of the subtrees left by
/// deleting `j` are qualitatively conditionally independent given `℘ⱼ`.
/// Nodes are visited in id order; the first violation is reported.
pub fn validate_markov(net: &Network) -> Result<MarkovReport> {
    if !net.is_tree() {
        return Err(Error::NotATree);
    }
    for j in 0..net.len() {
        let components = net.components_idx(j);
        let meets: Vec<Partition> = components
            .iter()
            .map(|c| {
                let parts: Vec<Partition> = c.iter().map(|&i| net.partition(i).clone()).collect();
                meet(&parts)
            })
            .collect::<Result<_>>()?;
        let given = net.partition(j);
        if let Some(w) = cond_independence_witness(&meets, given)? {
            let frame = net.frame();
            let labels = |bits: u64| frame.labels_of(bits).into_iter().map(String::from).collect();
            return Ok(MarkovReport {
                ok: false,
                violation: Some(MarkovViolation {
                    node: net.id(j).to_string(),
                    components: components
                        .iter()
                        .map(|c| c.iter().map(|&i| net.id(i).to_string()).collect())
                        .collect(),
                    given_block: labels(given.blocks()[w.given_block]),
                    selection: w
                        .selection
                        .iter()
                        .zip(&meets)
                        .map(|(&bi, p)| labels(p.blocks()[bi]))
                        .collect(),
                }),
            });
        }
    }
    Ok(MarkovReport { ok: true, violation: None })
}

/// Boolean incidence between the blocks of two partitions of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceKernel {
    rows: Vec<u64>,
    cols: usize,
}

impl IncidenceKernel {
    pub fn between(from: &Partition, to: &Partition) -> Result<IncidenceKernel> {
        Ok(IncidenceKernel { rows: from.incidence(to)?, cols: to.len() })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    /// Whether block `r` of the source meets block `c` of the target.
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r] >> c & 1 == 1
    }

    /// Row masks: bit `c` of row `r` is [`get(r, c)`](Self::get).
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn transpose(&self) -> IncidenceKernel {
        let rows = (0..self.cols)
            .map(|c| {
                (0..self.rows.len()).filter(|&r| self.get(r, c)).fold(0u64, |acc, r| acc | 1 << r)
            })
            .collect();
        IncidenceKernel { rows, cols: self.rows.len() }
    }
}

/// A tree of partitions with per-edge incidence kernels in both directions.
#[derive(Debug, Clone)]
pub struct MarkovTree {
    net: Network,
    kernels: HashMap<(usize, usize), IncidenceKernel>,
    markov_validated: bool,
}

impl MarkovTree {
    pub fn new(net: Network, check: MarkovCheck) -> Result<MarkovTree> {
        if !net.is_tree() {
            return Err(Error::NotATree);
        }
        let markov_validated = match check {
            MarkovCheck::Validate => {
                let report = validate_markov(&net)?;
                if let Some(v) = report.violation {
                    return Err(Error::MarkovViolation(Box::new(v)));
                }
                true
            }
            MarkovCheck::Skip => false,
        };
        let mut kernels = HashMap::new();
        for &(i, j) in net.edges() {
            let k = IncidenceKernel::between(net.partition(i), net.partition(j))?;
            kernels.insert((j, i), k.transpose());
            kernels.insert((i, j), k);
        }
        Ok(MarkovTree { net, kernels, markov_validated })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn markov_validated(&self) -> bool {
        self.markov_validated
    }

    /// Kernel projecting from `℘_from` to `℘_to` along an edge.
    pub fn edge_kernel(&self, from: &str, to: &str) -> Result<&IncidenceKernel> {
        let (i, j) = (self.net.index_of(from)?, self.net.index_of(to)?);
        self.kernel_idx(i, j).ok_or_else(|| Error::NotAnEdge(from.into(), to.into()))
    }

    pub(crate) fn kernel_idx(&self, from: usize, to: usize) -> Option<&IncidenceKernel> {
        self.kernels.get(&(from, to))
    }
}

impl std::ops::Deref for MarkovTree {
    type Target = Network;

    fn deref(&self) -> &Network {
        &self.net
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_algebra::Frame;
    use crate::fixtures::coordinate_cube as cube;

    #[test]
    fn coordinate_chain_is_markov() {
        let (f, c) = cube();
        let net = Network::new(
            &f,
            [("X", c[0].clone()), ("Y", c[1].clone()), ("Z", c[2].clone())],
            [("X", "Y"), ("Y", "Z")],
        )
        .unwrap();
        let report = validate_markov(&net).unwrap();
        assert!(report.ok);
        assert!(MarkovTree::new(net, MarkovCheck::Validate).unwrap().markov_validated());
    }

    #[test]
    fn single_node_is_markov() {
        let f = Frame::new(["a", "b"]).unwrap();
        let net = Network::new(&f, [("n", Partition::discrete(&f))], []).unwrap();
        assert!(validate_markov(&net).unwrap().ok);
    }

    #[test]
    fn coarse_middle_node_fails_with_witness() {
        let f = Frame::new(["a", "b"]).unwrap();
        let fine = Partition::discrete(&f);
        let net = Network::new(
            &f,
            [("L", fine.clone()), ("M", Partition::trivial(&f)), ("R", fine)],
            [("L", "M"), ("M", "R")],
        )
        .unwrap();
        let report = validate_markov(&net).unwrap();
        assert!(!report.ok);
        let v = report.violation.unwrap();
        assert_eq!(v.node, "M");
        assert_eq!(v.given_block, vec!["a", "b"]);
        assert_eq!(v.selection.len(), 2);
        assert_ne!(v.selection[0], v.selection[1]);
        assert!(matches!(
            MarkovTree::new(net.clone(), MarkovCheck::Validate),
            Err(Error::MarkovViolation(_))
        ));
        assert!(!MarkovTree::new(net, MarkovCheck::Skip).unwrap().markov_validated());
    }

    #[test]
    fn non_tree_is_rejected() {
        let f = Frame::new(["a"]).unwrap();
        let p = Partition::trivial(&f);
        let net = Network::new(&f, [("1", p.clone()), ("2", p)], []).unwrap();
        assert_eq!(validate_markov(&net).unwrap_err(), Error::NotATree);
        assert_eq!(MarkovTree::new(net, MarkovCheck::Skip).unwrap_err(), Error::NotATree);
    }

    #[test]
    fn edge_kernel_examples() {
        let f = Frame::new(["a", "b", "c", "d"]).unwrap();
        let halves = Partition::from_labels(&f, [["a", "b"], ["c", "d"]]).unwrap();
        let cross = Partition::from_labels(&f, [["a", "c"], ["b", "d"]]).unwrap();
        let net = Network::new(
            &f,
            [
                ("h", halves.clone()),
                ("h2", halves),
                ("x", cross),
                ("t", Partition::trivial(&f)),
            ],
            [("h", "h2"), ("h", "x"), ("h", "t")],
        )
        .unwrap();
        let tree = MarkovTree::new(net, MarkovCheck::Skip).unwrap();

        let same = tree.edge_kernel("h", "h2").unwrap();
        assert!(same.get(0, 0) && same.get(1, 1) && !same.get(0, 1) && !same.get(1, 0));

        let all = tree.edge_kernel("h", "x").unwrap();
        assert!((0..2).all(|r| (0..2).all(|c| all.get(r, c))));

        let col = tree.edge_kernel("h", "t").unwrap();
        assert_eq!(col.num_cols(), 1);
        assert!(col.get(0, 0) && col.get(1, 0));

        assert_eq!(tree.edge_kernel("t", "h").unwrap(), &col.transpose());
        assert!(matches!(tree.edge_kernel("x", "t"), Err(Error::NotAnEdge(..))));
    }
}

//! Small ready-made models used by tests, benchmarks and the CLI fixtures.

use crate::frame_algebra::{Frame, Partition};

/// Frame of all value tuples of `domains.len()` variables, with labels like
/// `"0,2,1"`. Element `e` encodes the tuple in mixed radix, first variable
/// most significant.
pub fn product_frame(domains: &[usize]) -> Frame {
    let size: usize = domains.iter().product();
    let labels = (0..size).map(|e| {
        tuple_of(e, domains).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    });
    Frame::with_limit(labels, crate::frame_algebra::MASK_BITS).expect("product frame fits")
}

/// Value tuple of element `e` of [`product_frame`].
pub fn tuple_of(mut e: usize, domains: &[usize]) -> Vec<usize> {
    let mut t = vec![0; domains.len()];
    for (slot, &d) in t.iter_mut().zip(domains).rev() {
        *slot = e % d;
        e /= d;
    }
    t
}

/// Partition of a product frame grouping tuples that agree on `vars`.
pub fn variable_partition(frame: &Frame, domains: &[usize], vars: &[usize]) -> Partition {
    let mut keys: Vec<Vec<usize>> = Vec::new();
    let mut blocks: Vec<u64> = Vec::new();
    for e in 0..frame.len() {
        let t = tuple_of(e, domains);
        let key: Vec<usize> = vars.iter().map(|&v| t[v]).collect();
        match keys.iter().position(|k| *k == key) {
            Some(i) => blocks[i] |= 1 << e,
            None => {
                keys.push(key);
                blocks.push(1 << e);
            }
        }
    }
    Partition::from_bits(frame, blocks).expect("variable partition is valid")
}

/// The frame `{0,1}³` with one partition per coordinate.
pub fn coordinate_cube() -> (Frame, Vec<Partition>) {
    let domains = [2, 2, 2];
    let f = product_frame(&domains);
    let parts = (0..3).map(|v| variable_partition(&f, &domains, &[v])).collect();
    (f, parts)
}

/// Every partition of `frame`, enumerated as restricted growth strings.
/// There are Bell(n) of them, so keep frames small.
pub fn all_partitions(frame: &Frame) -> Vec<Partition> {
    let n = frame.len();
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    loop {
        let k = labels.iter().max().unwrap() + 1;
        let mut blocks = vec![0u64; k];
        for (e, &l) in labels.iter().enumerate() {
            blocks[l] |= 1 << e;
        }
        out.push(Partition::from_bits(frame, blocks).expect("growth string gives a partition"));
        // Next restricted growth string.
        let mut i = n;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let max_prefix = labels[..i].iter().max().copied().unwrap_or(0);
            if labels[i] <= max_prefix {
                labels[i] += 1;
                for l in &mut labels[i + 1..] {
                    *l = 0;
                }
                break;
            }
        }
    }
}

/// Seeded random generators for property tests and benchmarks.
pub mod random {
    use rand::seq::SliceRandom;
    use rand::Rng;

    use crate::belief_core::MassFunction;
    use crate::frame_algebra::{Frame, Partition};
    use crate::markov_tree::{MarkovCheck, MarkovTree, Network};

    /// A frame `e0, e1, …` of `n` elements.
    pub fn frame(n: usize) -> Frame {
        Frame::new((0..n).map(|i| format!("e{i}"))).expect("small frame")
    }

    /// Uniform block labels in `0..k` for a random `k ≤ max_blocks`.
    pub fn partition<R: Rng>(rng: &mut R, frame: &Frame, max_blocks: usize) -> Partition {
        let k = rng.gen_range(1..=max_blocks.clamp(1, frame.len()));
        let mut blocks = vec![0u64; k];
        for e in 0..frame.len() {
            blocks[rng.gen_range(0..k)] |= 1 << e;
        }
        blocks.retain(|&b| b != 0);
        Partition::from_bits(frame, blocks).expect("nonempty disjoint cover")
    }

    /// Up to `max_focal` distinct nonempty focal sets with random masses.
    pub fn mass<R: Rng>(rng: &mut R, frame: &Frame, max_focal: usize) -> MassFunction {
        let full = frame.full_bits();
        let wanted = rng.gen_range(1..=max_focal.max(1));
        let mut sets: Vec<u64> = Vec::new();
        for _ in 0..wanted * 4 {
            if sets.len() == wanted {
                break;
            }
            let s = rng.gen::<u64>() & full;
            if s != 0 && !sets.contains(&s) {
                sets.push(s);
            }
        }
        if sets.is_empty() {
            sets.push(full);
        }
        let weights: Vec<f64> = sets.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        MassFunction::from_bits(frame, sets.into_iter().zip(weights.into_iter().map(|w| w / total)))
            .expect("normalized")
    }

    /// A random mass function carried by `p`, on `p`'s underlying frame.
    pub fn carried_mass<R: Rng>(rng: &mut R, p: &Partition, max_focal: usize) -> MassFunction {
        mass(rng, p.coarse_frame(), max_focal).vacuous_extend(p).expect("coarse frame of p")
    }

    /// Random labelled tree on `n` nodes `n0, n1, …`: node `i` attaches to
    /// a uniformly chosen earlier node.
    pub fn tree_edges<R: Rng>(rng: &mut R, n: usize) -> Vec<(String, String)> {
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        (1..n)
            .map(|i| (format!("n{}", ids[rng.gen_range(0..i)]), format!("n{}", ids[i])))
            .collect()
    }

    /// Random tree with random partitions; not necessarily Markov.
    pub fn network<R: Rng>(rng: &mut R, frame: &Frame, nodes: usize, max_blocks: usize) -> Network {
        let parts: Vec<(String, Partition)> =
            (0..nodes).map(|i| (format!("n{i}"), partition(rng, frame, max_blocks))).collect();
        Network::new(frame, parts, tree_edges(rng, nodes)).expect("valid network")
    }

    /// Draws random trees until one passes Markov validation. Node
    /// partitions are either random or induced by random variable subsets
    /// of a product frame, chosen per attempt.
    pub fn markov_tree<R: Rng>(
        rng: &mut R,
        frame_sizes: std::ops::RangeInclusive<usize>,
        nodes: std::ops::RangeInclusive<usize>,
    ) -> MarkovTree {
        loop {
            let n = rng.gen_range(nodes.clone());
            let net = if rng.gen_bool(0.5) {
                let f = frame(rng.gen_range(frame_sizes.clone()));
                network(rng, &f, n, 3)
            } else {
                match product_network(rng, &frame_sizes, n) {
                    Some(net) => net,
                    None => continue,
                }
            };
            if let Ok(tree) = MarkovTree::new(net, MarkovCheck::Validate) {
                return tree;
            }
        }
    }

    fn product_network<R: Rng>(
        rng: &mut R,
        frame_sizes: &std::ops::RangeInclusive<usize>,
        n: usize,
    ) -> Option<Network> {
        let options: &[&[usize]] = &[&[2, 2], &[2, 3], &[2, 2, 2], &[3, 2], &[2, 4], &[4, 2]];
        let fitting: Vec<&&[usize]> = options
            .iter()
            .filter(|d| frame_sizes.contains(&d.iter().product::<usize>()))
            .collect();
        let domains: &[usize] = fitting.choose(rng)?;
        let f = super::product_frame(domains);
        let parts: Vec<(String, Partition)> = (0..n)
            .map(|i| {
                let vars: Vec<usize> =
                    (0..domains.len()).filter(|_| rng.gen_bool(0.5)).collect();
                (format!("n{i}"), super::variable_partition(&f, domains, &vars))
            })
            .collect();
        Network::new(&f, parts, tree_edges(rng, n)).ok()
    }
}

//! Workload builders shared by the benchmarks.

use qmt_core::fixtures::{product_frame, variable_partition};
use qmt_core::markov_tree::MarkovCheck;
use qmt_core::{Engine, MassFunction, Network, Partition};

/// Chain over `n` binary variables where node `i` holds variables `i` and `i+1`.
pub fn chain_engine(n: usize) -> Engine {
    let domains = vec![2; n + 1];
    let frame = product_frame(&domains);
    let nodes: Vec<(String, Partition)> = (0..n)
        .map(|i| (format!("c{i}"), variable_partition(&frame, &domains, &[i, i + 1])))
        .collect();
    let edges = (1..n).map(|i| (format!("c{}", i - 1), format!("c{i}")));
    let net = Network::new(&frame, nodes, edges).expect("chain");
    with_leaf_evidence(Engine::from_network(net, MarkovCheck::Skip).expect("chain"))
}

/// Star whose centre holds all `k` binary variables and whose leaves hold one each.
pub fn star_engine(k: usize) -> Engine {
    let domains = vec![2; k];
    let frame = product_frame(&domains);
    let all: Vec<usize> = (0..k).collect();
    let mut nodes = vec![("hub".to_string(), variable_partition(&frame, &domains, &all))];
    nodes.extend((0..k).map(|i| (format!("v{i}"), variable_partition(&frame, &domains, &[i]))));
    let edges = (0..k).map(|i| ("hub".to_string(), format!("v{i}")));
    let net = Network::new(&frame, nodes, edges).expect("star");
    with_leaf_evidence(Engine::from_network(net, MarkovCheck::Skip).expect("star"))
}

fn with_leaf_evidence(mut engine: Engine) -> Engine {
    let leaves: Vec<String> =
        engine.tree().leaves().into_iter().map(str::to_string).collect();
    for leaf in leaves {
        let p = engine.tree().partition(engine.tree().index_of(&leaf).unwrap()).clone();
        let m = MassFunction::from_bits(p.coarse_frame(), [(0b01, 0.6), (p.coarse_frame().full_bits(), 0.4)])
            .expect("valid mass");
        engine.enter_evidence(&leaf, m).expect("no conflict");
    }
    engine
}

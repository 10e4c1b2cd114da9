//! Shared generators for unit tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::network::{FeatureNetwork, NetworkNode, NodeRef, ThresholdRule};

pub fn random_binary_dataset(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Dataset {
    let columns = (0..cols)
        .map(|_| {
            (0..rows)
                .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let names = (0..cols).map(|i| format!("v{i}")).collect();
    Dataset::new(names, columns).unwrap()
}

/// Random valid network: each node reads a random non-empty subset of
/// the input columns and all earlier nodes; ~1 in 8 slots is a sentinel.
pub fn random_network(rng: &mut ChaCha8Rng, n_inputs: usize, layer_sizes: &[usize]) -> FeatureNetwork {
    let mut layers: Vec<Vec<NetworkNode>> = Vec::new();
    for (l, &size) in layer_sizes.iter().enumerate() {
        let mut nodes = Vec::with_capacity(size);
        for _ in 0..size {
            if rng.random_range(0..8) == 0 {
                nodes.push(NetworkNode::AlwaysFalse);
                continue;
            }
            let mut candidates: Vec<NodeRef> = (0..n_inputs).map(NodeRef::Input).collect();
            for (el, layer) in layers.iter().enumerate().take(l) {
                for idx in 0..layer.len() {
                    candidates.push(NodeRef::Node { layer: el, index: idx });
                }
            }
            let mut inputs = Vec::new();
            for c in candidates {
                if rng.random::<f64>() < 0.35 {
                    inputs.push(c);
                }
            }
            if inputs.is_empty() {
                inputs.push(NodeRef::Input(rng.random_range(0..n_inputs)));
            }
            let quorum = rng.random_range(1..=inputs.len());
            nodes.push(NetworkNode::Rule(ThresholdRule::new(inputs, quorum).unwrap()));
        }
        layers.push(nodes);
    }
    FeatureNetwork::new(n_inputs, layers).unwrap()
}

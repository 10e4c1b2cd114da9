//! Flat parameter vector to feature network.
//!
//! Each node owns one parameter per candidate input (the dataset
//! columns plus every node of earlier layers) and one extra quorum
//! parameter. A candidate joins the rule iff its membership score is
//! strictly positive; nodes with no members become always-FALSE
//! sentinels, so every vector decodes to a valid network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{FeatureNetwork, NetworkNode, NodeRef, ThresholdRule};

/// Input arity and layer sizes; fixes the parameter vector layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub n_inputs: usize,
    pub layer_sizes: Vec<usize>,
}

impl NetworkShape {
    pub fn new(n_inputs: usize, layer_sizes: Vec<usize>) -> Self {
        Self {
            n_inputs,
            layer_sizes,
        }
    }

    /// Candidate inputs of a node in `layer`: every dataset column and
    /// every node of the layers before it.
    pub fn candidates(&self, layer: usize) -> usize {
        self.n_inputs + self.layer_sizes[..layer].iter().sum::<usize>()
    }

    /// Parameters of one node in `layer` (memberships plus quorum).
    pub fn node_params(&self, layer: usize) -> usize {
        self.candidates(layer) + 1
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .iter()
            .enumerate()
            .map(|(l, &n)| n * self.node_params(l))
            .sum()
    }

    /// Parameters covering the first `layers` layers only.
    pub fn param_count_prefix(&self, layers: usize) -> usize {
        self.layer_sizes
            .iter()
            .take(layers)
            .enumerate()
            .map(|(l, &n)| n * self.node_params(l))
            .sum()
    }

    /// Shape truncated to its first `layers` layers.
    pub fn prefix(&self, layers: usize) -> NetworkShape {
        NetworkShape {
            n_inputs: self.n_inputs,
            layer_sizes: self.layer_sizes[..layers].to_vec(),
        }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn candidate_ref(shape: &NetworkShape, ordinal: usize) -> NodeRef {
    if ordinal < shape.n_inputs {
        return NodeRef::Input(ordinal);
    }
    let mut rest = ordinal - shape.n_inputs;
    for (layer, &size) in shape.layer_sizes.iter().enumerate() {
        if rest < size {
            return NodeRef::Node { layer, index: rest };
        }
        rest -= size;
    }
    unreachable!("candidate ordinal out of range")
}

/// Decode a parameter vector into a network of the given shape.
///
/// Membership threshold is strictly 0 (decoded sums are zero-centred);
/// the quorum parameter is squashed onto (0, 1) and scaled to the
/// selected subset: `Q = clamp(round(logistic(q) * k), 1, k)`.
pub fn params_to_network(params: &[f64], shape: &NetworkShape) -> Result<FeatureNetwork> {
    let expected = shape.param_count();
    if params.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: params.len(),
        });
    }
    let mut layers = Vec::with_capacity(shape.layer_sizes.len());
    let mut cursor = 0;
    for (l, &size) in shape.layer_sizes.iter().enumerate() {
        let candidates = shape.candidates(l);
        let mut nodes = Vec::with_capacity(size);
        for _ in 0..size {
            let memberships = &params[cursor..cursor + candidates];
            let q_raw = params[cursor + candidates];
            cursor += candidates + 1;
            let inputs: Vec<NodeRef> = memberships
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 0.0)
                .map(|(ordinal, _)| candidate_ref(shape, ordinal))
                .collect();
            if inputs.is_empty() {
                nodes.push(NetworkNode::AlwaysFalse);
                continue;
            }
            let k = inputs.len();
            let quorum = ((logistic(q_raw) * k as f64).round() as usize).clamp(1, k);
            nodes.push(NetworkNode::Rule(ThresholdRule::new(inputs, quorum)?));
        }
        layers.push(nodes);
    }
    FeatureNetwork::new(shape.n_inputs, layers)
}

//! Layered networks of threshold (quorum) rules.
//!
//! A rule is TRUE iff at least Q of its inputs are active (>= 0.5);
//! with Q equal to the input count it is a logical And, with Q = 1 a
//! logical Or. Nodes may read the input columns and every node of any
//! earlier layer, never their own layer or later ones.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::DataSource;
use crate::error::{Error, Result};
use crate::parallel;

/// Reference to a rule input: a dataset column or an earlier node.
/// Layers are 0-based internally and rendered 1-based ("L1/N3").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRef {
    Input(usize),
    Node { layer: usize, index: usize },
}

impl NodeRef {
    /// Render using the given input column names.
    pub fn display(&self, input_names: &[String]) -> String {
        match *self {
            NodeRef::Input(i) => input_names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("col{i}")),
            NodeRef::Node { layer, index } => format!("L{}/N{}", layer + 1, index),
        }
    }

    /// Parse either a "L<layer>/N<node>" reference or a column name.
    pub fn parse(text: &str, input_names: &[String]) -> Result<NodeRef> {
        if let Some(rest) = text.strip_prefix('L') {
            if let Some((l, n)) = rest.split_once("/N") {
                if let (Ok(layer), Ok(index)) = (l.parse::<usize>(), n.parse::<usize>()) {
                    if layer == 0 {
                        return Err(Error::InvalidNetwork(format!(
                            "layer numbering starts at 1: {text}"
                        )));
                    }
                    return Ok(NodeRef::Node {
                        layer: layer - 1,
                        index,
                    });
                }
            }
        }
        match input_names.iter().position(|n| n == text) {
            Some(i) => Ok(NodeRef::Input(i)),
            None => Err(Error::InvalidNetwork(format!("unknown input: {text}"))),
        }
    }
}

/// TRUE iff at least `quorum` of `inputs` are active.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdRule {
    inputs: Vec<NodeRef>,
    quorum: usize,
}

impl ThresholdRule {
    pub fn new(inputs: Vec<NodeRef>, quorum: usize) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidRule("no inputs".into()));
        }
        for (i, r) in inputs.iter().enumerate() {
            if inputs[..i].contains(r) {
                return Err(Error::InvalidRule("duplicate input".into()));
            }
        }
        if quorum < 1 || quorum > inputs.len() {
            return Err(Error::InvalidRule(format!(
                "quorum {quorum} outside 1..={}",
                inputs.len()
            )));
        }
        Ok(Self { inputs, quorum })
    }

    pub fn inputs(&self) -> &[NodeRef] {
        &self.inputs
    }

    pub fn quorum(&self) -> usize {
        self.quorum
    }

    /// Evaluate against a value lookup for this example.
    pub fn eval(&self, lookup: impl Fn(&NodeRef) -> f64) -> f64 {
        let active = self.inputs.iter().filter(|r| lookup(r) >= 0.5).count();
        if active >= self.quorum {
            1.0
        } else {
            0.0
        }
    }
}

/// Binary activation of one rule for one example.
pub fn eval_rule(rule: &ThresholdRule, lookup: impl Fn(&NodeRef) -> f64) -> f64 {
    rule.eval(lookup)
}

/// One slot in a layer: a rule, or the always-FALSE sentinel produced
/// when a decoded parameter vector selects no inputs for the node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetworkNode {
    Rule(ThresholdRule),
    AlwaysFalse,
}

impl NetworkNode {
    pub fn as_rule(&self) -> Option<&ThresholdRule> {
        match self {
            NetworkNode::Rule(r) => Some(r),
            NetworkNode::AlwaysFalse => None,
        }
    }
}

/// Layered feature network over `n_inputs` dataset columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNetwork {
    n_inputs: usize,
    layers: Vec<Vec<NetworkNode>>,
}

impl FeatureNetwork {
    pub fn new(n_inputs: usize, layers: Vec<Vec<NetworkNode>>) -> Result<Self> {
        for (l, layer) in layers.iter().enumerate() {
            for (n, node) in layer.iter().enumerate() {
                let Some(rule) = node.as_rule() else { continue };
                for r in rule.inputs() {
                    match *r {
                        NodeRef::Input(i) if i < n_inputs => {}
                        NodeRef::Input(i) => {
                            return Err(Error::InvalidNetwork(format!(
                                "node L{}/N{n} references input {i}, arity is {n_inputs}",
                                l + 1
                            )));
                        }
                        NodeRef::Node { layer, index } => {
                            if layer >= l {
                                return Err(Error::InvalidNetwork(format!(
                                    "node L{}/N{n} references layer {} (not earlier)",
                                    l + 1,
                                    layer + 1
                                )));
                            }
                            if index >= layers[layer].len() {
                                return Err(Error::InvalidNetwork(format!(
                                    "node L{}/N{n} references missing node L{}/N{index}",
                                    l + 1,
                                    layer + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { n_inputs, layers })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn layers(&self) -> &[Vec<NetworkNode>] {
        &self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.len()).collect()
    }

    pub fn total_nodes(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    /// Flat node id of (layer, index) in evaluation order.
    pub fn flat_index(&self, layer: usize, index: usize) -> usize {
        self.layers[..layer].iter().map(|l| l.len()).sum::<usize>() + index
    }

    /// Evaluate every node on every row. Weights of an exact scrambled
    /// sample are carried through unchanged.
    pub fn propagate(&self, data: &impl DataSource) -> Result<ActivationTable> {
        if data.n_cols() != self.n_inputs {
            return Err(Error::ArityMismatch {
                expected: self.n_inputs,
                got: data.n_cols(),
            });
        }
        let n_rows = data.n_rows();
        let width = self.total_nodes();
        let mut values = vec![0.0f64; n_rows * width];
        let offsets: Vec<usize> = {
            let mut acc = 0;
            self.layers
                .iter()
                .map(|l| {
                    let o = acc;
                    acc += l.len();
                    o
                })
                .collect()
        };
        parallel::fill_row_chunks(&mut values, width.max(1), parallel::ROW_CHUNK, |first_row, chunk| {
            for (i, row_slice) in chunk.chunks_mut(width.max(1)).enumerate() {
                let row = first_row + i;
                if row >= n_rows {
                    break;
                }
                for (l, layer) in self.layers.iter().enumerate() {
                    for (n, node) in layer.iter().enumerate() {
                        let v = match node {
                            NetworkNode::AlwaysFalse => 0.0,
                            NetworkNode::Rule(rule) => rule.eval(|r| match *r {
                                NodeRef::Input(c) => data.value(row, c),
                                NodeRef::Node { layer, index } => row_slice[offsets[layer] + index],
                            }),
                        };
                        row_slice[offsets[l] + n] = v;
                    }
                }
            }
        });
        if width == 0 {
            values.clear();
        }
        Ok(ActivationTable {
            n_rows,
            layer_sizes: self.layer_sizes(),
            values,
            weights: data.weights().map(|w| w.to_vec()),
        })
    }

    pub fn to_doc(&self, input_names: &[String]) -> Result<NetworkDoc> {
        if input_names.len() != self.n_inputs {
            return Err(Error::ArityMismatch {
                expected: self.n_inputs,
                got: input_names.len(),
            });
        }
        let layers = self
            .layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|node| match node {
                        NetworkNode::AlwaysFalse => NodeDoc {
                            inputs: Vec::new(),
                            quorum: None,
                        },
                        NetworkNode::Rule(rule) => NodeDoc {
                            inputs: rule.inputs().iter().map(|r| r.display(input_names)).collect(),
                            quorum: Some(rule.quorum()),
                        },
                    })
                    .collect()
            })
            .collect();
        Ok(NetworkDoc {
            inputs: input_names.to_vec(),
            layers,
        })
    }

    pub fn from_doc(doc: &NetworkDoc) -> Result<(FeatureNetwork, Vec<String>)> {
        let mut layers = Vec::with_capacity(doc.layers.len());
        for layer in &doc.layers {
            let mut nodes = Vec::with_capacity(layer.len());
            for node in layer {
                if node.inputs.is_empty() {
                    nodes.push(NetworkNode::AlwaysFalse);
                    continue;
                }
                let inputs = node
                    .inputs
                    .iter()
                    .map(|s| NodeRef::parse(s, &doc.inputs))
                    .collect::<Result<Vec<_>>>()?;
                let quorum = node.quorum.ok_or_else(|| {
                    Error::InvalidNetwork("rule node without a quorum".into())
                })?;
                nodes.push(NetworkNode::Rule(ThresholdRule::new(inputs, quorum)?));
            }
            layers.push(nodes);
        }
        let net = FeatureNetwork::new(doc.inputs.len(), layers)?;
        Ok((net, doc.inputs.clone()))
    }

    pub fn write_json(&self, path: impl AsRef<Path>, input_names: &[String]) -> Result<()> {
        let doc = self.to_doc(input_names)?;
        let file = std::fs::File::create(path.as_ref())?;
        serde_json::to_writer_pretty(file, &doc)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<(FeatureNetwork, Vec<String>)> {
        let file = std::fs::File::open(path.as_ref())?;
        let doc: NetworkDoc = serde_json::from_reader(file)?;
        FeatureNetwork::from_doc(&doc)
    }
}

/// Interchange form: input names plus per-node references and quorums.
/// Sentinel nodes are empty-input entries without a quorum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub inputs: Vec<String>,
    pub layers: Vec<Vec<NodeDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub inputs: Vec<String>,
    pub quorum: Option<usize>,
}

/// Per-example, per-node binary activations, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTable {
    n_rows: usize,
    layer_sizes: Vec<usize>,
    values: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl ActivationTable {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn total_nodes(&self) -> usize {
        self.layer_sizes.iter().sum()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn flat_index(&self, layer: usize, index: usize) -> usize {
        self.layer_sizes[..layer].iter().sum::<usize>() + index
    }

    pub fn value(&self, row: usize, flat_node: usize) -> f64 {
        self.values[row * self.total_nodes() + flat_node]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.total_nodes();
        &self.values[row * w..(row + 1) * w]
    }

    /// Build directly from per-row activation slices (testing and
    /// coverage inputs that do not come from a propagation).
    pub fn from_rows(rows: &[Vec<f64>], layer_sizes: Vec<usize>, weights: Option<Vec<f64>>) -> Result<Self> {
        let width: usize = layer_sizes.iter().sum();
        let mut values = Vec::with_capacity(rows.len() * width);
        for row in rows {
            if row.len() != width {
                return Err(Error::ArityMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        if let Some(w) = &weights {
            if w.len() != rows.len() {
                return Err(Error::InvalidDataset("weight count != row count".into()));
            }
        }
        Ok(Self {
            n_rows: rows.len(),
            layer_sizes,
            values,
            weights,
        })
    }
}

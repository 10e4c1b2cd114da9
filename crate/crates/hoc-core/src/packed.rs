//! Bit-packed evaluation of quorum networks.
//!
//! Rules only see binarized values, so a row reduces to a bitmask and a
//! rule to a mask over its candidate space; evaluating a node is one
//! AND-popcount pass. This is the hot path of the evolutionary search
//! and is checked against [`FeatureNetwork::propagate`] by tests.

use crate::dataset::DataSource;
use crate::network::{FeatureNetwork, NetworkNode, NodeRef};
use crate::parallel;

/// Binarized rows as bitmasks, one bit per column.
#[derive(Debug, Clone)]
pub struct PackedTable {
    n_rows: usize,
    n_cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    weights: Option<Vec<f64>>,
}

impl PackedTable {
    pub fn from_source(data: &impl DataSource) -> Self {
        let n_rows = data.n_rows();
        let n_cols = data.n_cols();
        let words_per_row = n_cols.div_ceil(64);
        let mut bits = vec![0u64; n_rows * words_per_row];
        parallel::fill_row_chunks(&mut bits, words_per_row, parallel::ROW_CHUNK, |first_row, chunk| {
            for (i, row) in chunk.chunks_mut(words_per_row).enumerate() {
                let r = first_row + i;
                if r >= n_rows {
                    break;
                }
                for c in 0..n_cols {
                    if data.value(r, c) >= 0.5 {
                        row[c / 64] |= 1 << (c % 64);
                    }
                }
            }
        });
        Self {
            n_rows,
            n_cols,
            words_per_row,
            bits,
            weights: data.weights().map(|w| w.to_vec()),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words_per_row..(row + 1) * self.words_per_row]
    }
}

struct PackedNode {
    mask: Vec<u64>,
    quorum: usize,
    sentinel: bool,
}

/// A network compiled to candidate-space bitmasks.
///
/// Bit layout: columns at bits `0..n_cols`, node (layer, index) at bit
/// `n_cols + flat_index`.
pub struct PackedNetwork {
    n_inputs: usize,
    total_nodes: usize,
    width: usize,
    nodes: Vec<PackedNode>,
}

impl PackedNetwork {
    pub fn from_network(net: &FeatureNetwork) -> Self {
        let n_inputs = net.n_inputs();
        let total_nodes = net.total_nodes();
        let width = (n_inputs + total_nodes).div_ceil(64).max(1);
        let mut nodes = Vec::with_capacity(total_nodes);
        for layer in net.layers() {
            for node in layer {
                match node {
                    NetworkNode::AlwaysFalse => nodes.push(PackedNode {
                        mask: vec![0; width],
                        quorum: 1,
                        sentinel: true,
                    }),
                    NetworkNode::Rule(rule) => {
                        let mut mask = vec![0u64; width];
                        for r in rule.inputs() {
                            let pos = match *r {
                                NodeRef::Input(c) => c,
                                NodeRef::Node { layer, index } => {
                                    n_inputs + net.flat_index(layer, index)
                                }
                            };
                            mask[pos / 64] |= 1 << (pos % 64);
                        }
                        nodes.push(PackedNode {
                            mask,
                            quorum: rule.quorum(),
                            sentinel: false,
                        });
                    }
                }
            }
        }
        Self {
            n_inputs,
            total_nodes,
            width,
            nodes,
        }
    }

    pub fn total_nodes(&self) -> usize {
        self.total_nodes
    }
}

/// Per-node TRUE probabilities, plus per-row activation bits on demand.
pub struct PackedEval {
    /// TRUE probability per flat node: row fraction, or weight sum for
    /// weighted (exact scrambled) tables.
    pub true_prob: Vec<f64>,
    /// Node activation bits per row, `node_words` words per row.
    pub active_rows: Option<Vec<u64>>,
    pub node_words: usize,
}

/// Evaluate every node on every row.
pub fn evaluate(net: &PackedNetwork, table: &PackedTable, collect_rows: bool) -> PackedEval {
    assert_eq!(
        net.n_inputs,
        table.n_cols,
        "packed table and network disagree on arity"
    );
    let node_words = net.total_nodes.div_ceil(64).max(1);
    let wpr = table.words_per_row;
    let n_rows = table.n_rows;
    let partials = parallel::map_index_chunks(n_rows.max(1), parallel::ROW_CHUNK, |range| {
        let mut counts = vec![0.0f64; net.total_nodes];
        let mut rows_out = if collect_rows {
            vec![0u64; range.len() * node_words]
        } else {
            Vec::new()
        };
        let mut scratch = vec![0u64; net.width];
        for (i, row) in range.clone().enumerate() {
            if row >= n_rows {
                break;
            }
            scratch[..wpr].copy_from_slice(table.row_words(row));
            for w in scratch[wpr..].iter_mut() {
                *w = 0;
            }
            let weight = match &table.weights {
                Some(w) => w[row],
                None => 1.0,
            };
            for (flat, node) in net.nodes.iter().enumerate() {
                if node.sentinel {
                    continue;
                }
                let mut active: u32 = 0;
                for (m, s) in node.mask.iter().zip(scratch.iter()) {
                    active += (m & s).count_ones();
                }
                if active as usize >= node.quorum {
                    let pos = net.n_inputs + flat;
                    scratch[pos / 64] |= 1 << (pos % 64);
                    counts[flat] += weight;
                    if collect_rows {
                        rows_out[i * node_words + flat / 64] |= 1 << (flat % 64);
                    }
                }
            }
        }
        (counts, rows_out)
    });
    let mut true_prob = vec![0.0f64; net.total_nodes];
    let mut active_rows = collect_rows.then(|| Vec::with_capacity(n_rows * node_words));
    for (counts, rows_out) in partials {
        for (acc, c) in true_prob.iter_mut().zip(&counts) {
            *acc += c;
        }
        if let Some(out) = active_rows.as_mut() {
            out.extend_from_slice(&rows_out);
        }
    }
    if table.weights.is_none() && n_rows > 0 {
        for p in true_prob.iter_mut() {
            *p /= n_rows as f64;
        }
    }
    if let Some(out) = active_rows.as_mut() {
        out.truncate(n_rows * node_words);
    }
    PackedEval {
        true_prob,
        active_rows,
        node_words,
    }
}

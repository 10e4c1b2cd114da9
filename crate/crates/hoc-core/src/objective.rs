//! Coverage objective: high, uniform coverage by high-hoc features.
//!
//! For each example e and node k, `P_k(e) = activation * hoc`; `d(e)`
//! is the square root of the mean of the H highest P values (zero
//! padded below H nodes), and `cov` is the mean of d over examples.
//! The square root disproportionately rewards thinly covered examples,
//! which pushes the search toward uniform coverage.

use crate::network::ActivationTable;

/// Which nodes are pooled and how many P values enter each d(e).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageConfig {
    pub top_h: usize,
    pub scope: NodeScope,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            top_h: 10,
            scope: NodeScope::All,
        }
    }
}

/// Node pool: everything, or the first k layers only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeScope {
    All,
    LayerPrefix(usize),
}

/// Coverage with its per-example profile and the cumulative per-layer
/// view (layer 1; layers 1-2; ...).
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub cov: f64,
    pub per_example_d: Vec<f64>,
    pub per_layer_cov: Vec<f64>,
}

/// d for one example given its pooled P values.
fn d_of(p_values: &mut Vec<f64>, top_h: usize) -> f64 {
    p_values.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let top: f64 = p_values.iter().take(top_h).sum();
    (top / top_h as f64).sqrt()
}

fn cov_for_prefix(
    table: &ActivationTable,
    scores: &[f64],
    top_h: usize,
    n_pooled: usize,
) -> (f64, Vec<f64>) {
    let n_rows = table.n_rows();
    let mut per_example = Vec::with_capacity(n_rows);
    let mut buf = Vec::with_capacity(n_pooled);
    for r in 0..n_rows {
        buf.clear();
        let row = table.row(r);
        for k in 0..n_pooled {
            buf.push(row[k] * scores[k]);
        }
        per_example.push(d_of(&mut buf, top_h));
    }
    let cov = match table.weights() {
        Some(w) => {
            let total: f64 = w.iter().sum();
            per_example.iter().zip(w).map(|(d, wt)| d * wt).sum::<f64>() / total
        }
        None => per_example.iter().sum::<f64>() / n_rows.max(1) as f64,
    };
    (cov, per_example)
}

/// Coverage of an activation table under per-node hoc scores
/// (undefined hoc must already be mapped to 0).
///
/// `scores.len()` must equal the table's node count.
pub fn coverage(table: &ActivationTable, scores: &[f64], cfg: &CoverageConfig) -> CoverageReport {
    assert_eq!(
        scores.len(),
        table.total_nodes(),
        "one hoc score per pooled node"
    );
    let layer_sizes = table.layer_sizes();
    let pooled = match cfg.scope {
        NodeScope::All => table.total_nodes(),
        NodeScope::LayerPrefix(k) => layer_sizes.iter().take(k).sum(),
    };
    let top_h = cfg.top_h.max(1);
    let (cov, per_example_d) = cov_for_prefix(table, scores, top_h, pooled);
    let mut per_layer_cov = Vec::with_capacity(layer_sizes.len());
    let mut prefix = 0;
    for &size in layer_sizes {
        prefix += size;
        per_layer_cov.push(cov_for_prefix(table, scores, top_h, prefix).0);
    }
    CoverageReport {
        cov,
        per_example_d,
        per_layer_cov,
    }
}

/// Training-path coverage over packed activation rows (unweighted).
/// Must agree with [`coverage`]; packed tests check that.
pub(crate) fn coverage_from_bits(
    active_rows: &[u64],
    node_words: usize,
    n_rows: usize,
    scores: &[f64],
    top_h: usize,
    n_pooled: usize,
) -> f64 {
    if n_rows == 0 {
        return 0.0;
    }
    let top_h = top_h.max(1);
    let mut total = 0.0;
    let mut buf: Vec<f64> = Vec::with_capacity(n_pooled);
    for r in 0..n_rows {
        buf.clear();
        let words = &active_rows[r * node_words..(r + 1) * node_words];
        for k in 0..n_pooled {
            if (words[k / 64] >> (k % 64)) & 1 == 1 {
                buf.push(scores[k]);
            }
        }
        total += d_of(&mut buf, top_h);
    }
    total / n_rows as f64
}

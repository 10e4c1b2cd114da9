//! Rule scores: qr, qs, hyper-occurrence, and the pairwise baselines.
//!
//! `hoc = 1 - qs/qr` compares a rule's TRUE-probability on the real
//! dataset against the scrambled null. It is defined only for qs < qr
//! with qr > 0; an undefined score is reported distinctly and counts as
//! zero in objectives.

use std::fmt::Write as _;

use serde_json::json;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::network::{ActivationTable, FeatureNetwork, NetworkNode, NodeRef};
use crate::scramble::SdsSample;

/// One row of the rule table: where the rule sits, what it reads, and
/// how it scores. `quorum` is None for sentinel (always-FALSE) nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct HocReport {
    pub layer: usize,
    pub node: usize,
    pub inputs: Vec<NodeRef>,
    pub quorum: Option<usize>,
    pub qr: f64,
    pub qs: f64,
    pub hoc: Option<f64>,
}

/// Fraction of rows where the node is TRUE; weight sum on weighted
/// (exact scrambled) tables.
pub fn true_probability(table: &ActivationTable, flat_node: usize) -> f64 {
    match table.weights() {
        Some(weights) => (0..table.n_rows())
            .filter(|&r| table.value(r, flat_node) == 1.0)
            .map(|r| weights[r])
            .sum(),
        None => {
            let hits = (0..table.n_rows())
                .filter(|&r| table.value(r, flat_node) == 1.0)
                .count();
            hits as f64 / table.n_rows() as f64
        }
    }
}

/// Hyper-occurrence of a (qr, qs) pair; None when undefined.
pub fn hoc(qr: f64, qs: f64) -> Option<f64> {
    if qr > 0.0 && qs < qr {
        Some(1.0 - qs / qr)
    } else {
        None
    }
}

/// Objective view of the reports: undefined hoc contributes 0.
pub fn hoc_scores(reports: &[HocReport]) -> Vec<f64> {
    reports.iter().map(|r| r.hoc.unwrap_or(0.0)).collect()
}

fn p_true(column: &[f64]) -> f64 {
    column.iter().filter(|&&v| v >= 0.5).count() as f64 / column.len() as f64
}

/// Pearson correlation of two binarized columns (Eq. form for binary
/// variables); None when either column is constant.
pub fn pearson_binary(ds: &Dataset, col_a: usize, col_b: usize) -> Option<f64> {
    let a = ds.column(col_a);
    let b = ds.column(col_b);
    let pa = p_true(a);
    let pb = p_true(b);
    if pa == 0.0 || pa == 1.0 || pb == 0.0 || pb == 1.0 {
        return None;
    }
    let joint = a
        .iter()
        .zip(b)
        .filter(|(&x, &y)| x >= 0.5 && y >= 0.5)
        .count() as f64
        / a.len() as f64;
    Some((joint - pa * pb) / (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt())
}

/// Mutual information of two binarized columns, in bits.
pub fn mutual_information(ds: &Dataset, col_a: usize, col_b: usize) -> f64 {
    let a = ds.column(col_a);
    let b = ds.column(col_b);
    let n = a.len() as f64;
    let mut joint = [[0.0f64; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        joint[usize::from(x >= 0.5)][usize::from(y >= 0.5)] += 1.0;
    }
    let pa = [1.0 - p_true(a), p_true(a)];
    let pb = [1.0 - p_true(b), p_true(b)];
    let mut mi = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let p = joint[i][j] / n;
            if p > 0.0 {
                mi += p * (p / (pa[i] * pb[j])).log2();
            }
        }
    }
    mi
}

/// Score every node of a network: qr from the real dataset, qs from the
/// scrambled sample, hoc from the pair.
pub fn score_network(
    net: &FeatureNetwork,
    rds: &Dataset,
    sds: &SdsSample,
) -> Result<Vec<HocReport>> {
    let rds_table = net.propagate(rds)?;
    let sds_table = net.propagate(sds)?;
    let mut reports = Vec::with_capacity(net.total_nodes());
    for (l, layer) in net.layers().iter().enumerate() {
        for (n, node) in layer.iter().enumerate() {
            let flat = net.flat_index(l, n);
            let qr = true_probability(&rds_table, flat);
            let qs = true_probability(&sds_table, flat);
            let (inputs, quorum) = match node {
                NetworkNode::AlwaysFalse => (Vec::new(), None),
                NetworkNode::Rule(rule) => (rule.inputs().to_vec(), Some(rule.quorum())),
            };
            reports.push(HocReport {
                layer: l,
                node: n,
                inputs,
                quorum,
                qr,
                qs,
                hoc: hoc(qr, qs),
            });
        }
    }
    Ok(reports)
}

/// The `top` highest-hoc rules of each layer, defined scores first,
/// descending; ties and undefined entries keep node order.
pub fn top_per_layer(reports: &[HocReport], top: usize) -> Vec<HocReport> {
    let mut out = Vec::new();
    let mut layers: Vec<usize> = reports.iter().map(|r| r.layer).collect();
    layers.dedup();
    for layer in layers {
        let mut rows: Vec<&HocReport> = reports.iter().filter(|r| r.layer == layer).collect();
        rows.sort_by(|a, b| {
            b.hoc
                .unwrap_or(f64::NEG_INFINITY)
                .partial_cmp(&a.hoc.unwrap_or(f64::NEG_INFINITY))
                .unwrap()
                .then(a.node.cmp(&b.node))
        });
        out.extend(rows.into_iter().take(top).cloned());
    }
    out
}

fn hoc_text(h: Option<f64>) -> String {
    match h {
        Some(v) => v.to_string(),
        None => "undef".into(),
    }
}

/// Rule table as TSV with the fixed schema:
/// layer, node, inputs, quorum, qr, qs, hoc.
pub fn reports_to_tsv(reports: &[HocReport], input_names: &[String]) -> String {
    let mut out = String::from("layer\tnode\tinputs\tquorum\tqr\tqs\thoc\n");
    for r in reports {
        let inputs = r
            .inputs
            .iter()
            .map(|i| i.display(input_names))
            .collect::<Vec<_>>()
            .join(",");
        let quorum = r.quorum.map(|q| q.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.layer + 1,
            r.node,
            inputs,
            quorum,
            r.qr,
            r.qs,
            hoc_text(r.hoc)
        );
    }
    out
}

/// Same table as JSON; undefined hoc serializes as null.
pub fn reports_to_json(reports: &[HocReport], input_names: &[String]) -> serde_json::Value {
    json!(reports
        .iter()
        .map(|r| {
            json!({
                "layer": r.layer + 1,
                "node": r.node,
                "inputs": r.inputs.iter().map(|i| i.display(input_names)).collect::<Vec<_>>(),
                "quorum": r.quorum,
                "qr": r.qr,
                "qs": r.qs,
                "hoc": r.hoc,
            })
        })
        .collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_planted_exhaustive, PlantSpec};
    use crate::network::{NetworkNode, ThresholdRule};
    use crate::rng::stream_rng;
    use crate::scramble::{enumerate_exact, sample_mc, ScrambleSource, DEFAULT_EXACT_CAP};
    use crate::testutil;
    use rand::Rng;

    fn and_network(n_inputs: usize, cols: &[usize]) -> FeatureNetwork {
        let rule = ThresholdRule::new(cols.iter().map(|&c| NodeRef::Input(c)).collect(), cols.len())
            .unwrap();
        FeatureNetwork::new(n_inputs, vec![vec![NetworkNode::Rule(rule)]]).unwrap()
    }

    #[test]
    fn true_probability_all_true_and_counts() {
        let ds = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[
                vec![1.0, 1.0],
                vec![1.0, 1.0],
                vec![0.0, 0.0],
                vec![0.0, 0.0],
            ],
        )
        .unwrap();
        let net = and_network(2, &[0, 1]);
        let table = net.propagate(&ds).unwrap();
        assert_eq!(true_probability(&table, 0), 0.5);

        let all = Dataset::from_rows(vec!["a".into()], &[vec![1.0], vec![1.0]]).unwrap();
        let net1 = and_network(1, &[0]);
        assert_eq!(true_probability(&net1.propagate(&all).unwrap(), 0), 1.0);
    }

    #[test]
    fn exact_sds_and_of_fair_columns_is_quarter() {
        let ds = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[
                vec![1.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 0.0],
            ],
        )
        .unwrap();
        let sds = enumerate_exact(&ScrambleSource::from_dataset(&ds), DEFAULT_EXACT_CAP).unwrap();
        let table = and_network(2, &[0, 1]).propagate(&sds).unwrap();
        assert!((true_probability(&table, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hoc_boundaries() {
        assert_eq!(hoc(0.0, 0.0), None);
        assert_eq!(hoc(0.3, 0.3), None);
        assert_eq!(hoc(0.2, 0.5), None);
        assert_eq!(hoc(0.5, 0.0), Some(1.0));
        let h = hoc(0.5, 0.25).unwrap();
        assert!((h - 0.5).abs() < 1e-15);
        // undefined scores contribute zero to objectives
        let report = HocReport {
            layer: 0,
            node: 0,
            inputs: vec![],
            quorum: None,
            qr: 0.3,
            qs: 0.3,
            hoc: hoc(0.3, 0.3),
        };
        assert_eq!(hoc_scores(&[report]), vec![0.0]);
    }

    #[test]
    fn planted_and7_exact_oracle() {
        let plant = PlantSpec::new((0..6).collect(), 6, 6, 0.0);
        let rds = generate_planted_exhaustive(6, &[plant], 0).unwrap();
        let sds = enumerate_exact(&ScrambleSource::from_dataset(&rds), DEFAULT_EXACT_CAP).unwrap();
        let net = and_network(7, &[0, 1, 2, 3, 4, 5, 6]);
        let reports = score_network(&net, &rds, &sds).unwrap();
        assert_eq!(reports[0].qr, 1.0 / 64.0);
        assert_eq!(reports[0].qs, 1.0 / 4096.0);
        assert_eq!(reports[0].hoc, Some(0.984375));
    }

    #[test]
    fn pearson_identical_and_independent() {
        let ds = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[
                vec![1.0, 1.0],
                vec![1.0, 1.0],
                vec![0.0, 0.0],
                vec![0.0, 0.0],
            ],
        )
        .unwrap();
        assert!((pearson_binary(&ds, 0, 1).unwrap() - 1.0).abs() < 1e-15);

        let ind = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[
                vec![1.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 0.0],
            ],
        )
        .unwrap();
        assert!(pearson_binary(&ind, 0, 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pearson_hand_computed_case() {
        let ds = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[
                vec![1.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 0.0],
                vec![0.0, 0.0],
            ],
        )
        .unwrap();
        let expected = (0.25 - 0.125) / (0.25f64 * 0.1875).sqrt();
        assert!((pearson_binary(&ds, 0, 1).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.5774).abs() < 1e-4);
    }

    #[test]
    fn pearson_constant_column_is_undefined() {
        let ds = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[vec![1.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        assert_eq!(pearson_binary(&ds, 0, 1), None);
    }

    #[test]
    fn mutual_information_cases() {
        let ind = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[
                vec![1.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 0.0],
            ],
        )
        .unwrap();
        assert!(mutual_information(&ind, 0, 1).abs() < 1e-15);

        let same = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[vec![1.0, 1.0], vec![0.0, 0.0]],
        )
        .unwrap();
        assert!((mutual_information(&same, 0, 1) - 1.0).abs() < 1e-15);

        let anti = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        assert!((mutual_information(&anti, 0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn score_network_empty_is_empty() {
        let ds = Dataset::from_rows(vec!["a".into()], &[vec![1.0], vec![0.0]]).unwrap();
        let net = FeatureNetwork::new(1, vec![]).unwrap();
        let sds = enumerate_exact(&ScrambleSource::from_dataset(&ds), DEFAULT_EXACT_CAP).unwrap();
        assert!(score_network(&net, &ds, &sds).unwrap().is_empty());
    }

    #[test]
    fn top_per_layer_sorts_by_hoc() {
        let mut rng = stream_rng(21, 0);
        let rds = testutil::random_binary_dataset(&mut rng, 60, 6);
        let net = testutil::random_network(&mut rng, 6, &[8, 8]);
        let sds = enumerate_exact(&ScrambleSource::from_dataset(&rds), DEFAULT_EXACT_CAP).unwrap();
        let reports = score_network(&net, &rds, &sds).unwrap();
        let top = top_per_layer(&reports, 5);
        assert_eq!(top.len(), 10);
        for layer in [0usize, 1] {
            let rows: Vec<&HocReport> = top.iter().filter(|r| r.layer == layer).collect();
            assert_eq!(rows.len(), 5);
            for pair in rows.windows(2) {
                let a = pair[0].hoc.unwrap_or(f64::NEG_INFINITY);
                let b = pair[1].hoc.unwrap_or(f64::NEG_INFINITY);
                assert!(a >= b);
            }
        }
    }

    #[test]
    fn hoc_is_scale_invariant_under_row_duplication() {
        let mut rng = stream_rng(8, 1);
        let base = testutil::random_binary_dataset(&mut rng, 16, 4);
        let doubled = {
            let cols: Vec<Vec<f64>> = (0..4)
                .map(|c| {
                    let mut v = base.column(c).to_vec();
                    v.extend_from_slice(base.column(c));
                    v
                })
                .collect();
            Dataset::new(base.names().to_vec(), cols).unwrap()
        };
        let net = and_network(4, &[0, 1, 2]);
        let sds_a = enumerate_exact(&ScrambleSource::from_dataset(&base), DEFAULT_EXACT_CAP).unwrap();
        let sds_b = enumerate_exact(&ScrambleSource::from_dataset(&doubled), DEFAULT_EXACT_CAP).unwrap();
        let ra = &score_network(&net, &base, &sds_a).unwrap()[0];
        let rb = &score_network(&net, &doubled, &sds_b).unwrap()[0];
        assert_eq!(ra.qr, rb.qr);
        assert!((ra.qs - rb.qs).abs() < 1e-12);
        match (ra.hoc, rb.hoc) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
            (a, b) => assert_eq!(a, b),
        }
    }

    #[test]
    fn pearson_bridge_on_random_datasets() {
        // qr(And) - qs_exact(And) == P(A,B) - P(A)P(B); the acceptance
        // suite runs the full-width version of this check.
        let mut rng = stream_rng(31, 0);
        for _ in 0..20 {
            let rows = 2 + (rng.random::<u64>() % 30) as usize;
            let cols = 2 + (rng.random::<u64>() % 4) as usize;
            let ds = testutil::random_binary_dataset(&mut rng, rows, cols);
            let sds = enumerate_exact(&ScrambleSource::from_dataset(&ds), DEFAULT_EXACT_CAP).unwrap();
            for a in 0..cols {
                for b in (a + 1)..cols {
                    let net = and_network(cols, &[a, b]);
                    let reports = score_network(&net, &ds, &sds).unwrap();
                    let lhs = reports[0].qr - reports[0].qs;
                    let pa = p_true(ds.column(a));
                    let pb = p_true(ds.column(b));
                    let joint = (0..rows)
                        .filter(|&r| ds.column(a)[r] >= 0.5 && ds.column(b)[r] >= 0.5)
                        .count() as f64
                        / rows as f64;
                    assert!((lhs - (joint - pa * pb)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mc_qs_is_unbiased() {
        // And of three fair columns: exact qs = 1/8. The mean over
        // seeded Monte-Carlo estimates must sit within 4 standard
        // errors of the exact value.
        let col = vec![1.0, 0.0];
        let ds = Dataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![col.clone(), col.clone(), col],
        )
        .unwrap();
        let src = ScrambleSource::from_dataset(&ds);
        let net = and_network(3, &[0, 1, 2]);
        let trials = 50;
        let size = 2000;
        let mut mean = 0.0;
        for seed in 0..trials {
            let sds = sample_mc(&src, size, seed);
            let table = net.propagate(&sds).unwrap();
            mean += true_probability(&table, 0);
        }
        mean /= trials as f64;
        let exact: f64 = 0.125;
        let se = (exact * (1.0 - exact) / (size as f64 * trials as f64)).sqrt();
        assert!((mean - exact).abs() < 4.0 * se, "mean = {mean}");
    }

    #[test]
    fn tsv_schema_and_undef() {
        let report = HocReport {
            layer: 0,
            node: 3,
            inputs: vec![NodeRef::Input(0), NodeRef::Node { layer: 0, index: 1 }],
            quorum: Some(2),
            qr: 0.0,
            qs: 0.0,
            hoc: None,
        };
        let names = vec!["g1".to_string(), "g2".to_string()];
        let tsv = reports_to_tsv(&[report.clone()], &names);
        let mut lines = tsv.lines();
        assert_eq!(lines.next().unwrap(), "layer\tnode\tinputs\tquorum\tqr\tqs\thoc");
        assert_eq!(lines.next().unwrap(), "1\t3\tg1,L1/N1\t2\t0\t0\tundef");
        let js = reports_to_json(&[report], &names);
        assert!(js[0]["hoc"].is_null());
    }
}

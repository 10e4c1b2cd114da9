//! Scrambled datasets: the independence null that preserves marginals.
//!
//! The scrambled dataset keeps each column's empirical distribution but
//! breaks every dependency between columns. For small domains it is
//! enumerated exactly as weighted value combinations; otherwise it is
//! sampled per column with a seeded generator.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnMarginal, DataSource, Dataset};
use crate::error::{Error, Result};
use crate::parallel;
use crate::rng::stream_rng;

/// Full enumeration is refused above this many combinations.
pub const DEFAULT_EXACT_CAP: u64 = 10_000_000;

/// Default Monte-Carlo sample size; keeps the standard error of a
/// mid-range TRUE-probability below 0.005.
pub const DEFAULT_MC_SAMPLE_SIZE: usize = 10_000;

/// Marginals of a real dataset, ready to be scrambled.
#[derive(Debug, Clone, PartialEq)]
pub struct ScrambleSource {
    marginals: Vec<ColumnMarginal>,
    origin_rows: usize,
}

impl ScrambleSource {
    pub fn from_dataset(ds: &Dataset) -> Self {
        Self {
            marginals: ds.marginals(),
            origin_rows: ds.n_rows(),
        }
    }

    pub fn from_marginals(marginals: Vec<ColumnMarginal>) -> Result<Self> {
        let origin_rows = match marginals.first() {
            Some(m) => m.n_rows(),
            None => return Err(Error::InvalidDataset("no marginals".into())),
        };
        for m in &marginals {
            if m.n_rows() != origin_rows {
                return Err(Error::InvalidDataset(
                    "marginals disagree on the row count".into(),
                ));
            }
        }
        Ok(Self {
            marginals,
            origin_rows,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.marginals.len()
    }

    pub fn origin_rows(&self) -> usize {
        self.origin_rows
    }

    pub fn marginals(&self) -> &[ColumnMarginal] {
        &self.marginals
    }

    /// Number of rows an exact enumeration would produce.
    pub fn exact_combination_count(&self) -> u128 {
        self.marginals
            .iter()
            .fold(1u128, |acc, m| acc.saturating_mul(m.distinct_values.len() as u128))
    }
}

/// How a scrambled sample was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdsMode {
    Exact,
    MonteCarlo { sample_size: usize, seed: u64 },
}

/// A scrambled dataset: either every value combination once (with
/// product-of-marginals weights) or a seeded Monte-Carlo sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SdsSample {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    weights: Option<Vec<f64>>,
    mode: SdsMode,
}

impl SdsSample {
    pub fn mode(&self) -> SdsMode {
        self.mode
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n_cols..(r + 1) * self.n_cols]
    }

    /// Dump in the dataset CSV format; in exact mode `include_weights`
    /// appends the row weight as an extra `weight` column.
    pub fn write_csv(
        &self,
        path: impl AsRef<Path>,
        names: &[String],
        include_weights: bool,
    ) -> Result<()> {
        if names.len() != self.n_cols {
            return Err(Error::ArityMismatch {
                expected: self.n_cols,
                got: names.len(),
            });
        }
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        let with_weights = include_weights && self.weights.is_some();
        let mut header: Vec<String> = names.to_vec();
        if with_weights {
            header.push("weight".into());
        }
        writer.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for r in 0..self.n_rows {
            record.clear();
            for v in self.row(r) {
                record.push(v.to_string());
            }
            if with_weights {
                record.push(self.weights.as_ref().unwrap()[r].to_string());
            }
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

impl DataSource for SdsSample {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }
}

/// Enumerate every combination of per-column values, weighted by the
/// product of their marginal frequencies. Weights sum to 1.
pub fn enumerate_exact(src: &ScrambleSource, cap: u64) -> Result<SdsSample> {
    let combos = src.exact_combination_count();
    if combos > cap as u128 {
        return Err(Error::ExactCapExceeded {
            combinations: combos,
            cap,
        });
    }
    let n_rows = combos as usize;
    let n_cols = src.n_cols();
    let origin = src.origin_rows as f64;
    let mut values = Vec::with_capacity(n_rows * n_cols);
    let mut weights = Vec::with_capacity(n_rows);
    let mut digits = vec![0usize; n_cols];
    for _ in 0..n_rows {
        let mut w = 1.0;
        for (c, m) in src.marginals.iter().enumerate() {
            let d = digits[c];
            values.push(m.distinct_values[d]);
            w *= m.frequencies[d] as f64 / origin;
        }
        weights.push(w);
        // mixed-radix increment, last column fastest
        for c in (0..n_cols).rev() {
            digits[c] += 1;
            if digits[c] < src.marginals[c].distinct_values.len() {
                break;
            }
            digits[c] = 0;
        }
    }
    Ok(SdsSample {
        values,
        n_rows,
        n_cols,
        weights: Some(weights),
        mode: SdsMode::Exact,
    })
}

/// Draw `sample_size` rows, each column sampled independently from its
/// empirical marginal. Each row uses its own ChaCha stream, so the
/// result is identical for any worker count.
pub fn sample_mc(src: &ScrambleSource, sample_size: usize, seed: u64) -> SdsSample {
    let n_cols = src.n_cols();
    let origin = src.origin_rows as u64;
    // cumulative counts per column for integer-exact marginal draws
    let cumulative: Vec<Vec<u64>> = src
        .marginals
        .iter()
        .map(|m| {
            let mut acc = 0u64;
            m.frequencies
                .iter()
                .map(|&f| {
                    acc += f as u64;
                    acc
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0f64; sample_size * n_cols];
    parallel::fill_row_chunks(&mut values, n_cols, parallel::ROW_CHUNK, |first_row, chunk| {
        for (i, row) in chunk.chunks_mut(n_cols).enumerate() {
            let mut rng = stream_rng(seed, (first_row + i) as u64);
            for (c, slot) in row.iter_mut().enumerate() {
                let draw = rng.random_range(0..origin);
                let idx = cumulative[c].partition_point(|&acc| acc <= draw);
                *slot = src.marginals[c].distinct_values[idx];
            }
        }
    });
    SdsSample {
        values,
        n_rows: sample_size,
        n_cols,
        weights: None,
        mode: SdsMode::MonteCarlo {
            sample_size,
            seed,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use rand::Rng;

    fn source_of(columns: Vec<Vec<f64>>) -> ScrambleSource {
        let names = (0..columns.len()).map(|i| format!("c{i}")).collect();
        ScrambleSource::from_dataset(&Dataset::new(names, columns).unwrap())
    }

    #[test]
    fn exact_three_by_three_gives_27_rows() {
        let col = vec![0.0, 0.5, 1.0];
        let src = source_of(vec![col.clone(), col.clone(), col]);
        let sds = enumerate_exact(&src, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(sds.n_rows(), 27);
        let total: f64 = sds.weights().unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_single_binary_column() {
        let src = source_of(vec![vec![1.0, 1.0, 0.0, 0.0]]);
        let sds = enumerate_exact(&src, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(sds.n_rows(), 2);
        assert_eq!(sds.weights().unwrap(), &[0.5, 0.5]);
    }

    #[test]
    fn exact_weight_is_product_of_marginals() {
        // P(1) = 0.5 and 0.25 respectively; weight of (1,1) = 0.125.
        let src = source_of(vec![
            vec![1.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ]);
        let sds = enumerate_exact(&src, DEFAULT_EXACT_CAP).unwrap();
        let mut seen = false;
        for r in 0..sds.n_rows() {
            if sds.row(r) == [1.0, 1.0] {
                assert!((sds.weights().unwrap()[r] - 0.125).abs() < 1e-15);
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn exact_cap_exceeded_points_to_sampling() {
        let col = vec![0.0, 0.5, 1.0];
        let src = source_of(vec![col.clone(), col.clone(), col]);
        let err = enumerate_exact(&src, 10).unwrap_err();
        assert!(matches!(err, Error::ExactCapExceeded { combinations: 27, cap: 10 }));
        assert!(err.to_string().contains("Monte-Carlo"));
    }

    #[test]
    fn exact_preserves_marginals() {
        let src = source_of(vec![
            vec![1.0, 1.0, 1.0, 0.0, 0.0],
            vec![0.2, 0.2, 0.7, 0.7, 0.7],
        ]);
        let sds = enumerate_exact(&src, DEFAULT_EXACT_CAP).unwrap();
        for (c, m) in src.marginals().iter().enumerate() {
            for (v, &f) in m.distinct_values.iter().zip(&m.frequencies) {
                let mass: f64 = (0..sds.n_rows())
                    .filter(|&r| sds.value(r, c) == *v)
                    .map(|r| sds.weights().unwrap()[r])
                    .sum();
                assert!((mass - f as f64 / 5.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_independence_null() {
        // P(A=a and B=b) == P(A=a) * P(B=b) for random small datasets.
        let mut rng = stream_rng(11, 0);
        for _ in 0..50 {
            let n = rng.random_range(2..20);
            let cols: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect())
                .collect();
            let src = source_of(cols);
            let sds = enumerate_exact(&src, DEFAULT_EXACT_CAP).unwrap();
            let w = sds.weights().unwrap();
            for a in [0.0, 1.0] {
                for b in [0.0, 1.0] {
                    let joint: f64 = (0..sds.n_rows())
                        .filter(|&r| sds.value(r, 0) == a && sds.value(r, 1) == b)
                        .map(|r| w[r])
                        .sum();
                    let pa: f64 = (0..sds.n_rows())
                        .filter(|&r| sds.value(r, 0) == a)
                        .map(|r| w[r])
                        .sum();
                    let pb: f64 = (0..sds.n_rows())
                        .filter(|&r| sds.value(r, 1) == b)
                        .map(|r| w[r])
                        .sum();
                    assert!((joint - pa * pb).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mc_degenerate_marginals_give_identical_rows() {
        let src = source_of(vec![vec![0.3, 0.3], vec![1.0, 1.0]]);
        let sds = sample_mc(&src, 20, 5);
        for r in 0..20 {
            assert_eq!(sds.row(r), [0.3, 1.0]);
        }
    }

    #[test]
    fn mc_same_seed_identical() {
        let src = source_of(vec![vec![1.0, 0.0, 0.0], vec![0.5, 0.5, 0.0]]);
        let a = sample_mc(&src, 1000, 42);
        let b = sample_mc(&src, 1000, 42);
        assert_eq!(a, b);
        let c = sample_mc(&src, 1000, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn mc_joint_frequency_within_binomial_error() {
        // Two fair binary columns; P(row = (1,1)) = 0.25.
        let src = source_of(vec![vec![1.0, 1.0, 0.0, 0.0], vec![1.0, 0.0, 1.0, 0.0]]);
        let n = 100_000;
        let sds = sample_mc(&src, n, 7);
        let hits = (0..n).filter(|&r| sds.row(r) == [1.0, 1.0]).count();
        let p = hits as f64 / n as f64;
        let bound = 4.0 * (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((p - 0.25).abs() < bound, "p = {p}");
    }

    #[test]
    fn mc_marginals_converge() {
        let src = source_of(vec![vec![1.0, 1.0, 1.0, 0.0]]);
        let n = 100_000;
        let sds = sample_mc(&src, n, 3);
        let p = (0..n).filter(|&r| sds.value(r, 0) == 1.0).count() as f64 / n as f64;
        let bound = 4.0 * (0.75f64 * 0.25 / n as f64).sqrt();
        assert!((p - 0.75).abs() < bound);
    }

    #[test]
    fn csv_dump_with_weights_roundtrips_as_dataset() {
        let src = source_of(vec![vec![1.0, 0.0], vec![1.0, 1.0]]);
        let sds = enumerate_exact(&src, DEFAULT_EXACT_CAP).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sds.csv");
        sds.write_csv(&path, &["a".into(), "b".into()], true).unwrap();
        let back = Dataset::load_csv(&path, false).unwrap();
        assert_eq!(back.n_cols(), 3);
        assert_eq!(back.names()[2], "weight");
        assert_eq!(back.n_rows(), sds.n_rows());
    }
}

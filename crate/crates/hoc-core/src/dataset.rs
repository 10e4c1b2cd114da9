//! Column-oriented datasets of values in [0, 1].
//!
//! A [`Dataset`] is immutable after construction: rows are examples,
//! columns are variables. Per-column empirical marginals are the
//! sampling source for scrambled datasets, and the synthetic generator
//! plants known quorum dependencies so recovery can be checked against
//! exact oracles.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Read-only tabular access shared by real datasets and scrambled samples.
///
/// `weights()` is `Some` only for exact scrambled samples, where each
/// distinct value combination carries its product-of-marginals weight.
pub trait DataSource: Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn value(&self, row: usize, col: usize) -> f64;
    fn weights(&self) -> Option<&[f64]> {
        None
    }
}

/// Immutable table of [0, 1] values with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl Dataset {
    /// Build from column vectors, enforcing the dataset invariants.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::InvalidDataset("no columns".into()));
        }
        let n_rows = columns[0].len();
        if n_rows == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        for (name, col) in names.iter().zip(&columns) {
            if name.is_empty() {
                return Err(Error::InvalidDataset("empty column name".into()));
            }
            if col.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "column {name} has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        for (name, col) in names.iter().zip(&columns) {
            for (r, &v) in col.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange {
                        row: r + 1,
                        col: name.clone(),
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            names,
            columns,
            n_rows,
        })
    }

    /// Build from row vectors; convenience for tests and generators.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); n_cols];
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::InvalidDataset(format!(
                    "row has {} values, expected {n_cols}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        Self::new(names, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    /// Copy with every value replaced by 1.0 if >= 0.5, else 0.0.
    pub fn binarized(&self) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|col| col.iter().map(|&v| if v >= 0.5 { 1.0 } else { 0.0 }).collect())
            .collect();
        Dataset {
            names: self.names.clone(),
            columns,
            n_rows: self.n_rows,
        }
    }

    /// Empirical marginal of every column.
    pub fn marginals(&self) -> Vec<ColumnMarginal> {
        self.columns.iter().map(|c| ColumnMarginal::from_column(c)).collect()
    }

    /// Load a CSV file (header row required).
    ///
    /// With `binarize`, values are thresholded at 0.5 after validation.
    pub fn load_csv(path: impl AsRef<Path>, binarize: bool) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let names: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse {
                row: 0,
                col: String::new(),
                msg: e.to_string(),
            })?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Parse {
                row,
                col: String::new(),
                msg: e.to_string(),
            })?;
            if record.len() != names.len() {
                return Err(Error::Parse {
                    row,
                    col: String::new(),
                    msg: format!("{} fields, expected {}", record.len(), names.len()),
                });
            }
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row,
                    col: names[c].clone(),
                    msg: format!("cannot parse {field:?} as a number"),
                })?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange {
                        row,
                        col: names[c].clone(),
                        value: v,
                    });
                }
                columns[c].push(if binarize {
                    if v >= 0.5 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    v
                });
            }
        }
        Dataset::new(names, columns)
    }

    /// Write as CSV; values use the shortest representation that
    /// round-trips, so write -> load is exact.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        writer.write_record(&self.names)?;
        let mut record = Vec::with_capacity(self.n_cols());
        for r in 0..self.n_rows {
            record.clear();
            for col in &self.columns {
                record.push(col[r].to_string());
            }
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

impl DataSource for Dataset {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.columns.len()
    }

    fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }
}

/// Empirical distribution of one column: sorted distinct values with
/// their occurrence counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMarginal {
    pub distinct_values: Vec<f64>,
    pub frequencies: Vec<usize>,
}

impl ColumnMarginal {
    pub fn from_column(column: &[f64]) -> Self {
        let mut sorted = column.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut distinct_values = Vec::new();
        let mut frequencies: Vec<usize> = Vec::new();
        for v in sorted {
            match distinct_values.last() {
                Some(&last) if last == v => *frequencies.last_mut().unwrap() += 1,
                _ => {
                    distinct_values.push(v);
                    frequencies.push(1);
                }
            }
        }
        Self {
            distinct_values,
            frequencies,
        }
    }

    /// Number of rows in the source column.
    pub fn n_rows(&self) -> usize {
        self.frequencies.iter().sum()
    }

    /// Probability mass of values >= 0.5.
    pub fn p_true(&self) -> f64 {
        let n = self.n_rows() as f64;
        self.distinct_values
            .iter()
            .zip(&self.frequencies)
            .filter(|(v, _)| **v >= 0.5)
            .map(|(_, &f)| f as f64)
            .sum::<f64>()
            / n
    }
}

/// A quorum dependency to inject into synthetic data: the target column
/// becomes TRUE iff at least `quorum` of `relevant_vars` are TRUE, then
/// is flipped with probability `noise_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub relevant_vars: Vec<usize>,
    pub quorum: usize,
    pub target_var: usize,
    #[serde(default)]
    pub noise_rate: f64,
}

impl PlantSpec {
    pub fn new(relevant_vars: Vec<usize>, quorum: usize, target_var: usize, noise_rate: f64) -> Self {
        Self {
            relevant_vars,
            quorum,
            target_var,
            noise_rate,
        }
    }

    fn validate(&self, n_cols: usize) -> Result<()> {
        if self.relevant_vars.is_empty() {
            return Err(Error::InvalidPlant("no relevant variables".into()));
        }
        if self.quorum < 1 || self.quorum > self.relevant_vars.len() {
            return Err(Error::InvalidPlant(format!(
                "quorum {} outside 1..={}",
                self.quorum,
                self.relevant_vars.len()
            )));
        }
        if self.relevant_vars.contains(&self.target_var) {
            return Err(Error::InvalidPlant(format!(
                "target {} is one of its own inputs",
                self.target_var
            )));
        }
        for (i, &v) in self.relevant_vars.iter().enumerate() {
            if v >= n_cols {
                return Err(Error::InvalidPlant(format!("variable {v} out of range")));
            }
            if self.relevant_vars[..i].contains(&v) {
                return Err(Error::InvalidPlant(format!("variable {v} repeated")));
            }
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::InvalidPlant(format!(
                "noise rate {} outside [0, 1]",
                self.noise_rate
            )));
        }
        if self.target_var >= n_cols {
            return Err(Error::InvalidPlant(format!(
                "target {} out of range",
                self.target_var
            )));
        }
        Ok(())
    }
}

fn validate_plants(n_cols: usize, plants: &[PlantSpec]) -> Result<()> {
    if plants.is_empty() {
        return Err(Error::InvalidPlant("no plants given".into()));
    }
    let targets: Vec<usize> = plants.iter().map(|p| p.target_var).collect();
    for plant in plants {
        plant.validate(n_cols)?;
        for &v in &plant.relevant_vars {
            if targets.contains(&v) {
                return Err(Error::InvalidPlant(format!(
                    "variable {v} is a target of another plant"
                )));
            }
        }
    }
    for (i, &t) in targets.iter().enumerate() {
        if targets[..i].contains(&t) {
            return Err(Error::InvalidPlant(format!("target {t} repeated")));
        }
    }
    Ok(())
}

fn default_names(n_cols: usize) -> Vec<String> {
    (0..n_cols).map(|i| format!("v{i}")).collect()
}

fn apply_plants(
    columns: &mut [Vec<f64>],
    n_rows: usize,
    plants: &[PlantSpec],
    rng: &mut ChaCha8Rng,
) {
    for plant in plants {
        for r in 0..n_rows {
            let active = plant
                .relevant_vars
                .iter()
                .filter(|&&v| columns[v][r] >= 0.5)
                .count();
            let mut bit = active >= plant.quorum;
            if plant.noise_rate > 0.0 && rng.random::<f64>() < plant.noise_rate {
                bit = !bit;
            }
            columns[plant.target_var][r] = if bit { 1.0 } else { 0.0 };
        }
    }
}

/// Synthesize a dataset with several planted quorum rules.
///
/// Background variables are iid Bernoulli(0.5); every non-target column
/// is background. Deterministic for a fixed seed.
pub fn generate_planted_multi(
    n_rows: usize,
    n_background_vars: usize,
    plants: &[PlantSpec],
    seed: u64,
) -> Result<Dataset> {
    if n_rows == 0 || n_background_vars == 0 {
        return Err(Error::InvalidPlant("empty dataset requested".into()));
    }
    let n_cols = n_background_vars + plants.len();
    validate_plants(n_cols, plants)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = vec![vec![0.0; n_rows]; n_cols];
    let targets: Vec<usize> = plants.iter().map(|p| p.target_var).collect();
    for (c, col) in columns.iter_mut().enumerate() {
        if targets.contains(&c) {
            continue;
        }
        for v in col.iter_mut() {
            *v = if rng.random::<bool>() { 1.0 } else { 0.0 };
        }
    }
    apply_plants(&mut columns, n_rows, plants, &mut rng);
    Dataset::new(default_names(n_cols), columns)
}

/// Single-plant convenience wrapper around [`generate_planted_multi`].
pub fn generate_planted(
    n_rows: usize,
    n_background_vars: usize,
    plant: &PlantSpec,
    seed: u64,
) -> Result<Dataset> {
    generate_planted_multi(n_rows, n_background_vars, std::slice::from_ref(plant), seed)
}

/// Exhaustive mode: every background pattern appears exactly once, so
/// rule statistics on the result have closed forms.
///
/// Row count is 2^n_background_vars; the seed only matters when a plant
/// has nonzero noise.
pub fn generate_planted_exhaustive(
    n_background_vars: usize,
    plants: &[PlantSpec],
    seed: u64,
) -> Result<Dataset> {
    if n_background_vars == 0 || n_background_vars > 22 {
        return Err(Error::InvalidPlant(format!(
            "exhaustive mode supports 1..=22 background variables, got {n_background_vars}"
        )));
    }
    let n_cols = n_background_vars + plants.len();
    validate_plants(n_cols, plants)?;
    let n_rows = 1usize << n_background_vars;
    let targets: Vec<usize> = plants.iter().map(|p| p.target_var).collect();
    let background: Vec<usize> = (0..n_cols).filter(|c| !targets.contains(c)).collect();
    let mut columns = vec![vec![0.0; n_rows]; n_cols];
    for r in 0..n_rows {
        for (j, &c) in background.iter().enumerate() {
            columns[c][r] = ((r >> j) & 1) as f64;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    apply_plants(&mut columns, n_rows, plants, &mut rng);
    Dataset::new(default_names(n_cols), columns)
}

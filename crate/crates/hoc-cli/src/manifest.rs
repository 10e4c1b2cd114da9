//! Run manifests: enough metadata to audit and reproduce any artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliResult;

#[derive(Serialize)]
pub struct DatasetRef {
    pub path: String,
    pub sha256: String,
    pub n_rows: usize,
    pub n_cols: usize,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: serde_json::Value,
    pub dataset: Option<DatasetRef>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
    pub created_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, args: serde_json::Value) -> Self {
        Self {
            tool: "hoc".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            dataset: None,
            seed: None,
            outputs: Vec::new(),
            timings_ms: BTreeMap::new(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn with_dataset(
        mut self,
        path: &Path,
        n_rows: usize,
        n_cols: usize,
    ) -> CliResult<Self> {
        self.dataset = Some(DatasetRef {
            path: path.display().to_string(),
            sha256: file_sha256(path)?,
            n_rows,
            n_cols,
        });
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn record_timing(&mut self, label: &str, elapsed: std::time::Duration) {
        self.timings_ms.insert(label.into(), elapsed.as_millis());
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)
            .map_err(hoc_core::Error::from)?;
        Ok(())
    }
}

pub fn file_sha256(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Sidecar manifest path: `<artifact>.manifest.json`.
pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

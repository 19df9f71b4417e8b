//! Content digests, atomic writes and the run manifest.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    /// `curve`, `mesh`, `csv`, `trajectory` or `svg`.
    pub kind: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub stage: String,
    /// `validation` or `solver`.
    pub kind: String,
    pub message: String,
}

/// Library constants that influence results without being config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub uniformity_bound: f64,
    pub poincare_bound: f64,
    pub oracle_cell_budget: u64,
    pub quiescent_energy: f64,
    pub degeneracy_threshold: f64,
    pub segment_cap: usize,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            uniformity_bound: prefractal::lab::UNIFORMITY_BOUND,
            poincare_bound: prefractal::lab::POINCARE_BOUND,
            oracle_cell_budget: prefractal::lab::ORACLE_CELL_BUDGET as u64,
            quiescent_energy: prefractal::wave::QUIESCENT_ENERGY,
            degeneracy_threshold: prefractal::westervelt::DEGENERACY_THRESHOLD,
            segment_cap: prefractal::geometry::DEFAULT_SEGMENT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the resolved config in its canonical JSON form.
    pub config_hash: String,
    pub config: RunConfig,
    pub defaults: RunConfig,
    pub constants: Constants,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<Timing>,
    pub warnings: Vec<String>,
    pub error: Option<FailureRecord>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            tool: "prefractal".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: sha256_hex(config.to_json().as_bytes()),
            config: config.clone(),
            defaults: RunConfig::default(),
            constants: Constants::default(),
            artifacts: Vec::new(),
            timings: Vec::new(),
            warnings: Vec::new(),
            error: None,
        }
    }

    pub fn artifact(&self, path: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.path == path)
    }

    pub fn count(&self, kind: &str) -> usize {
        self.artifacts.iter().filter(|a| a.kind == kind).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

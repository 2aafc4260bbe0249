//! Output directory handling: atomic writes, content hashes, the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::RunError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ArtifactEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes files into one directory. Each file is written to a temporary
/// name and renamed into place, so a reader never sees a partial file.
/// Safe to share between parallel legs.
pub struct Artifacts {
    dir: PathBuf,
    written: Mutex<Vec<ArtifactEntry>>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), written: Mutex::new(Vec::new()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, RunError> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, &path)?;
        self.written.lock().unwrap().push(ArtifactEntry {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf, RunError> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }

    /// One CSV row per element of `rows`, header from the field names.
    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    /// CSV with an explicit header and preformatted cells.
    pub fn write_table(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    /// Written files sorted by name.
    pub fn entries(&self) -> Vec<ArtifactEntry> {
        let mut v = self.written.lock().unwrap().clone();
        v.sort();
        v
    }
}

/// Everything needed to tell two runs apart. Only this file carries
/// timing; every other artifact depends on the inputs alone.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema: String,
    pub command: String,
    pub inputs_sha256: String,
    pub config_path: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub versions: BTreeMap<String, String>,
    pub started_unix_s: f64,
    pub wall_clock_s: f64,
    pub hard_failures: usize,
    pub artifacts: Vec<ArtifactEntry>,
}

pub fn versions() -> BTreeMap<String, String> {
    [
        ("kaclab", env!("CARGO_PKG_VERSION")),
        ("density-core", density_core::VERSION),
        ("sphere-states", sphere_states::VERSION),
        ("kac-walk-sim", kac_walk_sim::VERSION),
        ("kac-boltzmann-solver", kac_boltzmann_solver::VERSION),
        ("inequality-certifier", inequality_certifier::VERSION),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

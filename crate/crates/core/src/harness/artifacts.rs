use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CbfError, Result};

pub const MANIFEST: &str = "manifest.json";
/// Holds the wall-clock timestamps and is left out of the manifest so the
/// rest of the tree is reproducible.
pub const METADATA: &str = "metadata.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub exit_code: i32,
    pub artifacts: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?)
    }

    /// Recomputes every checksum and reports the first mismatch.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for e in &self.artifacts {
            let bytes = fs::read(dir.join(&e.path))?;
            if hex::encode(Sha256::digest(&bytes)) != e.sha256 {
                return Err(CbfError::CheckFailed(format!("checksum mismatch for {}", e.path)));
            }
        }
        Ok(())
    }
}

/// Writes files under one output directory and remembers their checksums.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    entries: BTreeMap<String, ManifestEntry>,
    started: String,
}

impl ArtifactWriter {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            entries: BTreeMap::new(),
            started: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` at the relative path `name`.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        if name == MANIFEST || name == METADATA {
            return Err(CbfError::InvalidArgument(format!("{name} is reserved")));
        }
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.entries.insert(
            name.to_string(),
            ManifestEntry {
                path: name.to_string(),
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(bytes)),
            },
        );
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Writes the manifest and the metadata file.
    pub fn finish(self, scenario: &str, exit_code: i32, extra: serde_json::Value) -> Result<Manifest> {
        let manifest = Manifest {
            scenario: scenario.to_string(),
            exit_code,
            artifacts: self.entries.into_values().collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST), text)?;
        let meta = serde_json::json!({
            "started": self.started,
            "finished": chrono::Utc::now().to_rfc3339(),
            "version": env!("CARGO_PKG_VERSION"),
            "run": extra,
        });
        fs::write(self.root.join(METADATA), serde_json::to_string_pretty(&meta)?)?;
        Ok(manifest)
    }
}

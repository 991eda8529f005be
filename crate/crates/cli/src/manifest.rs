//! Per-stage manifests that make re-runs resumable.
//!
//! A stage records the hashes of its inputs and its settings after it
//! finishes. When a later invocation computes the same manifest and every
//! declared output still exists, the stage is skipped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anonloss::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub version: String,
    pub settings: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    /// Inputs under `root` are recorded relative to it, so two output roots
    /// fed the same inputs get identical manifests.
    pub fn new(stage: &str, settings: serde_json::Value, inputs: &[PathBuf], outputs: &[&str], root: &Path) -> Result<Self> {
        let mut hashes = BTreeMap::new();
        for p in inputs {
            let key = match p.strip_prefix(root) {
                Ok(rel) => format!("$OUT/{}", rel.display()),
                Err(_) => p.display().to_string(),
            };
            hashes.insert(key, file_sha256(p)?);
        }
        Ok(Manifest {
            stage: stage.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            settings,
            inputs: hashes,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn path(dir: &Path) -> PathBuf {
        dir.join("manifest.json")
    }

    /// True when `dir` holds a manifest equal to this one and all outputs.
    pub fn is_current(&self, dir: &Path) -> bool {
        let Ok(text) = std::fs::read_to_string(Self::path(dir)) else { return false };
        let Ok(previous) = serde_json::from_str::<Manifest>(&text) else { return false };
        previous == *self && self.outputs.iter().all(|o| dir.join(o).exists())
    }

    /// Removes any old manifest so an interrupted run is never mistaken for
    /// a finished one.
    pub fn invalidate(dir: &Path) -> Result<()> {
        let path = Self::path(dir);
        match std::fs::remove_file(&path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    pub fn commit(&self, dir: &Path) -> Result<()> {
        let path = Self::path(dir);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn changes_to_inputs_or_settings_invalidate() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(&input, "a").unwrap();
        std::fs::write(dir.path().join("out.txt"), "x").unwrap();
        let m = Manifest::new("s", serde_json::json!({"k": 1}), &[input.clone()], &["out.txt"], dir.path()).unwrap();
        assert!(!m.is_current(dir.path()));
        m.commit(dir.path()).unwrap();
        assert!(m.is_current(dir.path()));
        let other = Manifest::new("s", serde_json::json!({"k": 2}), &[input.clone()], &["out.txt"], dir.path()).unwrap();
        assert!(!other.is_current(dir.path()));
        std::fs::write(&input, "b").unwrap();
        let changed = Manifest::new("s", serde_json::json!({"k": 1}), &[input], &["out.txt"], dir.path()).unwrap();
        assert!(!changed.is_current(dir.path()));
        std::fs::remove_file(dir.path().join("out.txt")).unwrap();
        assert!(!m.is_current(dir.path()));
        assert_eq!(m.inputs.keys().next().unwrap(), "$OUT/in.txt");
    }
}

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PromptKind, TEMPLATE_VERSION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub kind: PromptKind,
    pub provider: String,
    pub response: String,
    pub output_tokens: Option<usize>,
    pub logprobs: Option<Vec<f64>>,
}

/// Content-addressed response store. Entries live at
/// `<root>/<first two hex chars>/<key>.json`; writes go through a temporary
/// file and an atomic rename so concurrent readers never see partial files.
#[derive(Debug)]
pub struct ResponseCache {
    root: Option<PathBuf>,
    memory: RwLock<HashMap<String, CacheEntry>>,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl ResponseCache {
    pub fn in_memory() -> Self {
        ResponseCache { root: None, memory: RwLock::new(HashMap::new()) }
    }

    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(ResponseCache { root: Some(root), memory: RwLock::new(HashMap::new()) })
    }

    pub fn key(kind: PromptKind, payload: &str, provider_id: &str) -> String {
        let mut hasher = Sha256::new();
        for part in [kind.name(), TEMPLATE_VERSION, provider_id, payload] {
            hasher.update((part.len() as u64).to_le_bytes());
            hasher.update(part.as_bytes());
        }
        hex::encode(hasher.finalize())
    }

    fn path_for(&self, key: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(&key[..2]).join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        if let Some(entry) = self.memory.read().unwrap().get(key) {
            return Some(entry.clone());
        }
        let path = self.path_for(key)?;
        let text = fs::read_to_string(&path).ok()?;
        let entry: CacheEntry = match serde_json::from_str(&text) {
            Ok(entry) => entry,
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {}: {e}", path.display());
                return None;
            }
        };
        if entry.key != key {
            log::warn!("cache entry {} carries key {}; ignoring", path.display(), entry.key);
            return None;
        }
        self.memory.write().unwrap().insert(key.to_string(), entry.clone());
        Some(entry)
    }

    pub fn put(&self, entry: CacheEntry) -> Result<()> {
        if let Some(path) = self.path_for(&entry.key) {
            let dir = path.parent().expect("cache path has a parent");
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let tmp = dir.join(format!(
                ".{}.{}.{}.tmp",
                entry.key,
                std::process::id(),
                TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
            ));
            fs::write(&tmp, serde_json::to_vec_pretty(&entry)?).map_err(|e| Error::io(&tmp, e))?;
            fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        }
        self.memory.write().unwrap().insert(entry.key.clone(), entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.memory.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

//! On-disk cache of convolution features.
//!
//! Entries are keyed by a SHA-256 digest of everything the features depend
//! on and written to a temporary file that is renamed into place, so readers
//! never observe a partial entry.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::ArgGraph;
use crate::io::graph_to_string;
use crate::kernel::CompatConfig;
use crate::matching::MatchParams;
use crate::vocabulary::MotifVocabulary;

use super::FeatureMatrix;

/// Environment variable that overrides the cache directory.
pub const CACHE_ENV: &str = "MOTIFCONV_CACHE";

/// Hex digest identifying a (dataset, vocabulary, kernel, matcher) combination.
pub fn cache_key(
    dataset: &[ArgGraph],
    vocab: &MotifVocabulary,
    cfg: &CompatConfig,
    mp: &MatchParams,
) -> String {
    let mut h = Sha256::new();
    h.update(b"dataset\n");
    for g in dataset {
        h.update(graph_to_string(g).as_bytes());
        h.update(b"\n");
    }
    h.update(format!("vocab k={}\n", vocab.k).as_bytes());
    for m in &vocab.motifs {
        h.update(graph_to_string(m).as_bytes());
        h.update(b"\n");
    }
    h.update(
        serde_json::to_string(&vocab.kernel)
            .expect("serializable")
            .as_bytes(),
    );
    h.update(serde_json::to_string(cfg).expect("serializable").as_bytes());
    h.update(serde_json::to_string(mp).expect("serializable").as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCache {
    dir: PathBuf,
}

impl FeatureCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FeatureCache { dir: dir.into() }
    }

    /// The directory named by `MOTIFCONV_CACHE` if set, else `fallback`.
    pub fn from_env(fallback: Option<PathBuf>) -> Option<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Some(FeatureCache::new(dir)),
            _ => fallback.map(FeatureCache::new),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Cached features for `key`; unreadable or corrupt entries count as misses.
    pub fn load(&self, key: &str) -> Option<Vec<FeatureMatrix>> {
        let text = fs::read_to_string(self.entry(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store(&self, key: &str, features: &[FeatureMatrix]) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.entry(key);
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        let text = serde_json::to_string(features).expect("features serialize");
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

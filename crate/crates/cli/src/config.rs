//! TOML run configuration. Every field is optional; command-line flags take
//! precedence over the file, and the file over built-in defaults.
//!
//! ```toml
//! kernel = "synthetic"
//! alpha = 0.7
//! workers = 4
//! seed = 0
//! cache_dir = "cache"
//!
//! [matching]
//! beta0 = 1.0
//! sinkhorn_max_iters = 1000
//!
//! [vocab]
//! k = 4
//! sample_target = 200
//!
//! [logreg]
//! epochs = 500
//!
//! [experiment]
//! size = 500
//! seeds = [0, 1, 2, 3, 4]
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use motifconv::kernel::KernelPreset;
use motifconv::synthgen::AttachPolicy;
use motifconv::{LogRegParams, MatchParams, VocabParams};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSection {
    pub beta0: Option<f64>,
    pub beta_final: Option<f64>,
    pub beta_rate: Option<f64>,
    pub sinkhorn_max_iters: Option<usize>,
    pub sinkhorn_tol: Option<f64>,
    pub warm_start: Option<bool>,
    pub quadratic_factor: Option<f64>,
}

impl MatchSection {
    pub fn apply(&self, mut p: MatchParams) -> MatchParams {
        if let Some(v) = self.beta0 {
            p.beta0 = v;
        }
        if let Some(v) = self.beta_final {
            p.beta_final = v;
        }
        if let Some(v) = self.beta_rate {
            p.beta_rate = v;
        }
        if let Some(v) = self.sinkhorn_max_iters {
            p.sinkhorn_max_iters = v;
        }
        if let Some(v) = self.sinkhorn_tol {
            p.sinkhorn_tol = v;
        }
        if let Some(v) = self.warm_start {
            p.warm_start = v;
        }
        if let Some(v) = self.quadratic_factor {
            p.quadratic_factor = v;
        }
        p
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabSection {
    pub k: Option<usize>,
    pub sample_target: Option<usize>,
    pub n_motifs: Option<usize>,
    pub partition_size: Option<usize>,
    pub per_partition_keep: Option<usize>,
}

impl VocabSection {
    pub fn apply(&self, mut p: VocabParams) -> VocabParams {
        p.k = self.k.unwrap_or(p.k);
        p.sample_target = self.sample_target.unwrap_or(p.sample_target);
        p.n_motifs = self.n_motifs.unwrap_or(p.n_motifs);
        p.partition_size = self.partition_size.unwrap_or(p.partition_size);
        p.per_partition_keep = self.per_partition_keep.unwrap_or(p.per_partition_keep);
        p
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRegSection {
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
}

impl LogRegSection {
    pub fn apply(&self, mut p: LogRegParams) -> LogRegParams {
        p.lr = self.lr.unwrap_or(p.lr);
        p.epochs = self.epochs.unwrap_or(p.epochs);
        p.l2 = self.l2.unwrap_or(p.l2);
        p
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub size: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub noise_std: Option<f64>,
    pub attach_policy: Option<AttachPolicy>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: Option<KernelPreset>,
    pub alpha: Option<f64>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub matching: MatchSection,
    #[serde(default)]
    pub vocab: VocabSection,
    #[serde(default)]
    pub logreg: LogRegSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

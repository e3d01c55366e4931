//! Motif convolution features.
//!
//! Each node is described by the similarity of its k-hop neighborhood to
//! every motif of a vocabulary. Graph-level vectors come from a
//! permutation-invariant readout over node rows.

mod cache;
mod csv;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{k_hop_subgraph, ArgGraph};
use crate::kernel::CompatConfig;
use crate::matching::{match_and_score, worker_pool, MatchParams};
use crate::vocabulary::MotifVocabulary;

pub use cache::{cache_key, FeatureCache, CACHE_ENV};
pub use csv::{
    read_graph_features_csv, write_graph_features_csv, write_node_features_csv, GraphFeatureRow,
};

/// Node-by-motif similarity features of one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub graph_id: usize,
    /// `node_count x N`, one row per node in node order.
    pub rows: Array2<f64>,
}

fn check_kernel(vocab: &MotifVocabulary, cfg: &CompatConfig) -> Result<()> {
    if vocab.is_empty() {
        return Err(Error::Empty("motif vocabulary"));
    }
    if &vocab.kernel != cfg {
        let name = |c: &CompatConfig| match c.preset() {
            Some(p) => format!("{p} (alpha {})", c.alpha),
            None => format!("custom kernel (alpha {})", c.alpha),
        };
        return Err(Error::KernelMismatch(format!(
            "vocabulary was built with {} but convolution uses {}",
            name(&vocab.kernel),
            name(cfg)
        )));
    }
    Ok(())
}

fn score_task(
    g: &ArgGraph,
    v: usize,
    motif: &ArgGraph,
    k: usize,
    cfg: &CompatConfig,
    mp: &MatchParams,
) -> Result<f64> {
    let sub = k_hop_subgraph(g, v, k)?;
    match_and_score(&sub, motif, cfg, mp).map(|(_, s)| s)
}

/// Scores of the k-hop neighborhood of `v` against every motif, in vocabulary
/// order.
pub fn motif_convolve_node(
    g: &ArgGraph,
    v: usize,
    vocab: &MotifVocabulary,
    cfg: &CompatConfig,
    mp: &MatchParams,
) -> Result<Vec<f64>> {
    check_kernel(vocab, cfg)?;
    let sub = k_hop_subgraph(g, v, vocab.k)?;
    vocab
        .motifs
        .iter()
        .map(|m| match_and_score(&sub, m, cfg, mp).map(|(_, s)| s))
        .collect()
}

pub fn motif_convolve_graph(
    g: &ArgGraph,
    vocab: &MotifVocabulary,
    cfg: &CompatConfig,
    mp: &MatchParams,
    workers: usize,
) -> Result<FeatureMatrix> {
    let mut out = convolve_dataset(std::slice::from_ref(g), vocab, cfg, mp, workers)?;
    Ok(out.pop().expect("one graph in, one matrix out"))
}

/// Convolves every graph. All (graph, node, motif) scores are independent
/// tasks on one worker pool; the result does not depend on `workers`.
pub fn convolve_dataset(
    graphs: &[ArgGraph],
    vocab: &MotifVocabulary,
    cfg: &CompatConfig,
    mp: &MatchParams,
    workers: usize,
) -> Result<Vec<FeatureMatrix>> {
    check_kernel(vocab, cfg)?;
    mp.validate()?;
    let n_motifs = vocab.len();
    let tasks: Vec<(usize, usize, usize)> = graphs
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| {
            (0..g.node_count()).flat_map(move |v| (0..n_motifs).map(move |j| (gi, v, j)))
        })
        .collect();
    let pool = worker_pool(workers)?;
    let scores: Vec<f64> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(gi, v, j)| score_task(&graphs[gi], v, &vocab.motifs[j], vocab.k, cfg, mp))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut offset = 0;
    Ok(graphs
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            let len = g.node_count() * n_motifs;
            let rows = Array2::from_shape_vec(
                (g.node_count(), n_motifs),
                scores[offset..offset + len].to_vec(),
            )
            .expect("task count matches shape");
            offset += len;
            FeatureMatrix { graph_id: gi, rows }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    #[default]
    Max,
    Mean,
    Sum,
}

impl FromStr for Readout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Readout::Max),
            "mean" => Ok(Readout::Mean),
            "sum" => Ok(Readout::Sum),
            other => Err(Error::InvalidParam(format!(
                "unknown readout `{other}` (expected max, mean or sum)"
            ))),
        }
    }
}

impl fmt::Display for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Readout::Max => "max",
            Readout::Mean => "mean",
            Readout::Sum => "sum",
        })
    }
}

/// Column-wise reduction of node rows to one graph vector. Sums run over
/// sorted values, so every mode is exactly invariant to row order.
pub fn readout(rows: &Array2<f64>, mode: Readout) -> Result<Vec<f64>> {
    if rows.nrows() == 0 {
        return Err(Error::Empty("feature matrix"));
    }
    let sorted_sum = |col: ndarray::ArrayView1<f64>| {
        let mut v = col.to_vec();
        v.sort_by(f64::total_cmp);
        v.iter().sum::<f64>()
    };
    Ok(rows
        .columns()
        .into_iter()
        .map(|col| match mode {
            Readout::Max => col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Readout::Sum => sorted_sum(col),
            Readout::Mean => sorted_sum(col) / col.len() as f64,
        })
        .collect())
}

/// Per-dimension affine rescaling to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Dimensions whose fitted variance was zero; their std is 1.
    pub degenerate: Vec<bool>,
}

impl Standardizer {
    /// Fits on training vectors with the population standard deviation.
    pub fn fit(train: &[Vec<f64>]) -> Result<Self> {
        let first = train
            .first()
            .ok_or(Error::Empty("standardizer training set"))?;
        let dim = first.len();
        if let Some(bad) = train.iter().find(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.len(),
            });
        }
        if train.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("standardizer training set"));
        }
        let n = train.len() as f64;
        let mean: Vec<f64> = (0..dim)
            .map(|d| train.iter().map(|x| x[d]).sum::<f64>() / n)
            .collect();
        let mut std = Vec::with_capacity(dim);
        let mut degenerate = Vec::with_capacity(dim);
        for d in 0..dim {
            let var = train.iter().map(|x| (x[d] - mean[d]).powi(2)).sum::<f64>() / n;
            let s = var.sqrt();
            degenerate.push(s == 0.0);
            std.push(if s > 0.0 { s } else { 1.0 });
        }
        Ok(Standardizer {
            mean,
            std,
            degenerate,
        })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                left: self.mean.len(),
                right: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn apply_all(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.apply(x)).collect()
    }
}

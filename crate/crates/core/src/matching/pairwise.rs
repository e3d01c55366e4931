//! All-pairs similarity with a communication-free workload partition.
//!
//! Graphs are cut into fixed-size batches. Every unordered pair of batches
//! (including a batch with itself) is one independent block; blocks share
//! only read-only inputs and own disjoint output cells, so the result does
//! not depend on how blocks are scheduled.

use std::ops::Range;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::ArgGraph;
use crate::kernel::CompatConfig;

use super::{match_and_score, MatchParams};

pub const DEFAULT_BATCH_SIZE: usize = 8;

/// Pairs `(i, j)` with `i` in `left` and `j` in `right`; for a diagonal
/// block (`left == right`) only `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBlock {
    pub left: Range<usize>,
    pub right: Range<usize>,
}

impl PairBlock {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let diagonal = self.left == self.right;
        self.left.clone().flat_map(move |i| {
            let start = if diagonal { i + 1 } else { self.right.start };
            (start..self.right.end).map(move |j| (i, j))
        })
    }
}

pub fn partition_pairs(n: usize, batch_size: usize) -> Vec<PairBlock> {
    let batch_size = batch_size.max(1);
    let batches: Vec<Range<usize>> = (0..n)
        .step_by(batch_size)
        .map(|s| s..(s + batch_size).min(n))
        .collect();
    let mut blocks = Vec::new();
    for (a, left) in batches.iter().enumerate() {
        for right in &batches[a..] {
            blocks.push(PairBlock {
                left: left.clone(),
                right: right.clone(),
            });
        }
    }
    blocks
}

pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidParam("workers must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParam(format!("cannot start worker pool: {e}")))
}

/// Symmetric matrix of matcher scores for every pair of `graphs`, with 1 on
/// the diagonal. Bit-identical for any `workers >= 1`.
pub fn pairwise_similarity(
    graphs: &[ArgGraph],
    cfg: &CompatConfig,
    p: &MatchParams,
    workers: usize,
) -> Result<Array2<f64>> {
    let n = graphs.len();
    let blocks = partition_pairs(n, DEFAULT_BATCH_SIZE);
    let pool = worker_pool(workers)?;
    let results: Vec<Vec<(usize, usize, f64)>> = pool.install(|| {
        blocks
            .par_iter()
            .map(|block| {
                block
                    .pairs()
                    .map(|(i, j)| {
                        match_and_score(&graphs[i], &graphs[j], cfg, p).map(|(_, s)| (i, j, s))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = Array2::eye(n);
    for (i, j, s) in results.into_iter().flatten() {
        out[[i, j]] = s;
        out[[j, i]] = s;
    }
    Ok(out)
}

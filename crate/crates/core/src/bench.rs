//! Wall-clock timing of all-pairs matching across worker counts.

use std::io::Write;
use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::ArgGraph;
use crate::kernel::CompatConfig;
use crate::matching::{pairwise_similarity, MatchParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub workers: usize,
    pub pairs: usize,
    pub seconds: f64,
    /// Time at the first worker count divided by time at this one.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Whether every worker count produced a bit-identical matrix.
    pub identical: bool,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "workers,pairs,seconds,speedup,identical")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.6},{:.4},{}",
                r.workers, r.pairs, r.seconds, r.speedup, self.identical
            )?;
        }
        out.flush()
    }

    pub fn speedup(&self, workers: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.workers == workers)
            .map(|r| r.speedup)
    }
}

fn bit_identical(a: &Array2<f64>, b: &Array2<f64>) -> bool {
    a.dim() == b.dim()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Runs [`pairwise_similarity`] once per worker count, in the given order.
pub fn bench_pairwise(
    graphs: &[ArgGraph],
    cfg: &CompatConfig,
    mp: &MatchParams,
    worker_counts: &[usize],
) -> Result<(BenchReport, Array2<f64>)> {
    if worker_counts.is_empty() {
        return Err(Error::Empty("worker count list"));
    }
    let pairs = graphs.len() * graphs.len().saturating_sub(1) / 2;
    let mut rows = Vec::new();
    let mut reference: Option<Array2<f64>> = None;
    let mut identical = true;
    for &w in worker_counts {
        let start = Instant::now();
        let sim = pairwise_similarity(graphs, cfg, mp, w)?;
        let seconds = start.elapsed().as_secs_f64();
        let base = rows.first().map_or(seconds, |r: &BenchRow| r.seconds);
        rows.push(BenchRow {
            workers: w,
            pairs,
            seconds,
            speedup: base / seconds.max(f64::MIN_POSITIVE),
        });
        match &reference {
            Some(r) => identical &= bit_identical(r, &sim),
            None => reference = Some(sim),
        }
    }
    Ok((
        BenchReport { rows, identical },
        reference.expect("at least one run"),
    ))
}

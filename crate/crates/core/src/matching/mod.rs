//! Approximate ARG matching by graduated assignment, greedy hard assignment,
//! and the size-normalized similarity score.

mod oracle;
mod pairwise;
mod sinkhorn;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ArgGraph;
use crate::kernel::CompatConfig;

pub use oracle::{brute_force_match, BRUTE_FORCE_LIMIT};
pub(crate) use pairwise::worker_pool;
pub use pairwise::{pairwise_similarity, partition_pairs, PairBlock, DEFAULT_BATCH_SIZE};
pub use sinkhorn::{
    marginal_residuals, sinkhorn_in_place, sinkhorn_in_place_logged, sinkhorn_normalize,
    SinkhornReport,
};

// exp() underflows to zero below roughly -745
const MIN_EXPONENT: f64 = -700.0;

/// Annealing schedule and inner normalization settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    pub beta0: f64,
    pub beta_final: f64,
    pub beta_rate: f64,
    pub sinkhorn_max_iters: usize,
    pub sinkhorn_tol: f64,
    /// Seed each step's normalization with the previous step's row/column
    /// scalings. The square-case fixed point is unchanged.
    #[serde(default = "default_true")]
    pub warm_start: bool,
    /// Weight of the edge-pair sum in the linearized objective. 1 is the
    /// exact partial derivative of the quadratic matching objective; 0.5
    /// gives the halved variant.
    #[serde(default = "default_quadratic_factor")]
    pub quadratic_factor: f64,
}

fn default_quadratic_factor() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            beta0: 1.0,
            beta_final: 30.0,
            beta_rate: 0.075,
            sinkhorn_max_iters: 1000,
            sinkhorn_tol: 1e-6,
            warm_start: true,
            quadratic_factor: 1.0,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta0.is_finite() && self.beta0 > 0.0) {
            return Err(Error::InvalidParam(format!(
                "beta0 must be > 0, got {}",
                self.beta0
            )));
        }
        if !(self.beta_final.is_finite() && self.beta_final > self.beta0) {
            return Err(Error::InvalidParam(format!(
                "beta_final must exceed beta0, got {} <= {}",
                self.beta_final, self.beta0
            )));
        }
        if !(self.beta_rate.is_finite() && self.beta_rate > 0.0) {
            return Err(Error::InvalidParam(format!(
                "beta_rate must be > 0, got {}",
                self.beta_rate
            )));
        }
        if !(self.quadratic_factor.is_finite() && self.quadratic_factor >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "quadratic_factor must be >= 0, got {}",
                self.quadratic_factor
            )));
        }
        if self.sinkhorn_max_iters == 0 || self.sinkhorn_tol.is_nan() || self.sinkhorn_tol < 0.0 {
            return Err(Error::InvalidParam(
                "sinkhorn needs max_iters >= 1 and tol >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Number of annealing steps the schedule performs.
    pub fn steps(&self) -> usize {
        let mut beta = self.beta0;
        let mut n = 0;
        while beta <= self.beta_final {
            n += 1;
            beta *= 1.0 + self.beta_rate;
        }
        n
    }
}

/// Soft matching matrix, `n1 x n2`, non-negative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAssignment {
    pub m: Array2<f64>,
}

/// Binary injective matching as a list of `(node in g1, node in g2)` pairs,
/// in the order they were selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardAssignment {
    pub pairs: Vec<(usize, usize)>,
    pub n1: usize,
    pub n2: usize,
}

impl HardAssignment {
    pub fn new(pairs: Vec<(usize, usize)>, n1: usize, n2: usize) -> Result<Self> {
        let h = HardAssignment { pairs, n1, n2 };
        h.validate()?;
        Ok(h)
    }

    pub fn identity(n: usize) -> Self {
        HardAssignment {
            pairs: (0..n).map(|u| (u, u)).collect(),
            n1: n,
            n2: n,
        }
    }

    /// Checks index ranges and injectivity in both directions.
    pub fn validate(&self) -> Result<()> {
        let mut used1 = vec![false; self.n1];
        let mut used2 = vec![false; self.n2];
        for &(u, i) in &self.pairs {
            if u >= self.n1 || i >= self.n2 {
                return Err(Error::InvalidMatching(format!(
                    "pair ({u}, {i}) outside {}x{}",
                    self.n1, self.n2
                )));
            }
            if used1[u] || used2[i] {
                return Err(Error::InvalidMatching(format!(
                    "pair ({u}, {i}) reuses a node"
                )));
            }
            used1[u] = true;
            used2[i] = true;
        }
        Ok(())
    }

    /// Swaps the roles of the two graphs.
    pub fn transposed(&self) -> Self {
        HardAssignment {
            pairs: self.pairs.iter().map(|&(u, i)| (i, u)).collect(),
            n1: self.n2,
            n2: self.n1,
        }
    }

    /// Pairs ordered by the `g1` node.
    pub fn sorted_pairs(&self) -> Vec<(usize, usize)> {
        let mut p = self.pairs.clone();
        p.sort_unstable();
        p
    }

    /// Dense 0/1 matrix form.
    pub fn to_matrix(&self) -> Array2<u8> {
        let mut m = Array2::zeros((self.n1, self.n2));
        for &(u, i) in &self.pairs {
            m[[u, i]] = 1;
        }
        m
    }

    /// `g2` partner of every `g1` node.
    pub fn forward_map(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.n1];
        for &(u, i) in &self.pairs {
            map[u] = Some(i);
        }
        map
    }
}

/// Diagnostics for one annealing step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealStep {
    pub beta: f64,
    pub sinkhorn: SinkhornReport,
    pub row_residual: f64,
    pub col_residual: f64,
}

pub(crate) fn check_compatible(g1: &ArgGraph, g2: &ArgGraph) -> Result<()> {
    if g1.node_dim() != g2.node_dim() {
        return Err(Error::DimensionMismatch {
            left: g1.node_dim(),
            right: g2.node_dim(),
        });
    }
    if let (Some(a), Some(b)) = (g1.edge_dim(), g2.edge_dim()) {
        if a != b {
            return Err(Error::DimensionMismatch { left: a, right: b });
        }
    }
    Ok(())
}

/// Row-major `n1 x n2` node compatibility matrix.
pub(crate) fn node_compat_matrix(g1: &ArgGraph, g2: &ArgGraph, cfg: &CompatConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(g1.node_count() * g2.node_count());
    for a in g1.nodes() {
        for b in g2.nodes() {
            out.push(cfg.node_kernel.eval_unchecked(a, b));
        }
    }
    out
}

struct EdgePair {
    u: usize,
    v: usize,
    i: usize,
    j: usize,
    weight: f64,
}

fn graduated_core(
    g1: &ArgGraph,
    g2: &ArgGraph,
    cfg: &CompatConfig,
    p: &MatchParams,
    mut trace: Option<&mut Vec<AnnealStep>>,
) -> Result<SoftAssignment> {
    p.validate()?;
    check_compatible(g1, g2)?;
    if !g1.is_finite() || !g2.is_finite() {
        return Err(Error::NonFinite("graph attributes"));
    }
    let (n1, n2) = (g1.node_count(), g2.node_count());
    let node_c = node_compat_matrix(g1, g2, cfg);

    let mut pairs = Vec::new();
    for e in g1.edges() {
        for f in g2.edges() {
            let c = cfg.edge_kernel.eval_unchecked(&e.attrs, &f.attrs);
            if c > 0.0 {
                pairs.push(EdgePair {
                    u: e.u,
                    v: e.v,
                    i: f.u,
                    j: f.v,
                    weight: p.quadratic_factor * c,
                });
            }
        }
    }

    let mut m = node_c.clone();
    let mut q = vec![0.0; n1 * n2];
    let mut log_row = vec![0.0; n1];
    let mut log_col = vec![0.0; n2];
    let mut beta = p.beta0;
    while beta <= p.beta_final {
        for (qk, nk) in q.iter_mut().zip(&node_c) {
            *qk = cfg.alpha * nk;
        }
        // each undirected edge pair stands for both orientations
        for ep in &pairs {
            let (ui, uj, vi, vj) = (
                ep.u * n2 + ep.i,
                ep.u * n2 + ep.j,
                ep.v * n2 + ep.i,
                ep.v * n2 + ep.j,
            );
            q[ui] += ep.weight * m[vj];
            q[vj] += ep.weight * m[ui];
            q[uj] += ep.weight * m[vi];
            q[vi] += ep.weight * m[uj];
        }
        for u in 0..n1 {
            for i in 0..n2 {
                m[u * n2 + i] = beta * q[u * n2 + i] + log_row[u] + log_col[i];
            }
        }
        let e_max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for mk in m.iter_mut() {
            *mk = (*mk - e_max).max(MIN_EXPONENT).exp();
        }
        let report = if p.warm_start {
            let r = sinkhorn_in_place_logged(
                &mut m,
                n1,
                n2,
                p.sinkhorn_tol,
                p.sinkhorn_max_iters,
                &mut log_row,
                &mut log_col,
            )?;
            let shift = log_row.iter().sum::<f64>() / n1 as f64;
            log_row.iter_mut().for_each(|x| *x -= shift);
            r
        } else {
            sinkhorn_in_place(&mut m, n1, n2, p.sinkhorn_tol, p.sinkhorn_max_iters)?
        };
        if let Some(t) = trace.as_deref_mut() {
            let (row_residual, col_residual) = marginal_residuals(&m, n1, n2);
            t.push(AnnealStep {
                beta,
                sinkhorn: report,
                row_residual,
                col_residual,
            });
        }
        beta *= 1.0 + p.beta_rate;
    }
    let m = Array2::from_shape_vec((n1, n2), m).expect("shape matches buffer");
    Ok(SoftAssignment { m })
}

/// Soft assignment between `g1` and `g2` by annealed softmax over the
/// linearized matching objective.
pub fn graduated_assignment(
    g1: &ArgGraph,
    g2: &ArgGraph,
    cfg: &CompatConfig,
    p: &MatchParams,
) -> Result<SoftAssignment> {
    graduated_core(g1, g2, cfg, p, None)
}

/// Like [`graduated_assignment`], also returning per-step normalization diagnostics.
pub fn graduated_assignment_traced(
    g1: &ArgGraph,
    g2: &ArgGraph,
    cfg: &CompatConfig,
    p: &MatchParams,
) -> Result<(SoftAssignment, Vec<AnnealStep>)> {
    let mut trace = Vec::new();
    let soft = graduated_core(g1, g2, cfg, p, Some(&mut trace))?;
    Ok((soft, trace))
}

/// Repeatedly takes the largest remaining entry and removes its row and
/// column. Ties go to the lower row, then the lower column.
pub fn greedy_hard_assignment(s: &SoftAssignment) -> Result<HardAssignment> {
    let (n1, n2) = s.m.dim();
    if s.m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("soft assignment"));
    }
    let mut row_free = vec![true; n1];
    let mut col_free = vec![true; n2];
    let mut pairs = Vec::with_capacity(n1.min(n2));
    for _ in 0..n1.min(n2) {
        let mut best: Option<(usize, usize, f64)> = None;
        for (u, _) in row_free.iter().enumerate().filter(|(_, f)| **f) {
            for (i, _) in col_free.iter().enumerate().filter(|(_, f)| **f) {
                let x = s.m[[u, i]];
                if best.is_none_or(|(_, _, b)| x > b) {
                    best = Some((u, i, x));
                }
            }
        }
        let (u, i, _) = best.expect("free cells remain");
        row_free[u] = false;
        col_free[i] = false;
        pairs.push((u, i));
    }
    Ok(HardAssignment { pairs, n1, n2 })
}

/// Size-normalized similarity of two graphs under a hard matching:
///
/// `(E / sqrt(l1 l2) + alpha * N / sqrt(n1 n2)) / (1 + alpha)`
///
/// where `N` sums node compatibilities over matched pairs and `E` sums edge
/// compatibilities over edges whose endpoints are both matched onto an edge.
/// Two edgeless graphs have a perfect edge term of 1, so isomorphic graphs
/// always score 1; when exactly one graph is edgeless the edge term is 0.
pub fn similarity_score(
    g1: &ArgGraph,
    g2: &ArgGraph,
    h: &HardAssignment,
    cfg: &CompatConfig,
) -> Result<f64> {
    check_compatible(g1, g2)?;
    if h.n1 != g1.node_count() || h.n2 != g2.node_count() {
        return Err(Error::InvalidMatching(format!(
            "matching is {}x{}, graphs are {}x{}",
            h.n1,
            h.n2,
            g1.node_count(),
            g2.node_count()
        )));
    }
    h.validate()?;
    let map = h.forward_map();

    let node_sum: f64 = h
        .pairs
        .iter()
        .map(|&(u, i)| {
            cfg.node_kernel
                .eval_unchecked(g1.node_attrs(u), g2.node_attrs(i))
        })
        .sum();

    let (l1, l2) = (g1.edge_count(), g2.edge_count());
    let mut edge_sum = 0.0;
    if l1 > 0 && l2 > 0 {
        for e in g1.edges() {
            if let (Some(i), Some(j)) = (map[e.u], map[e.v]) {
                if let Some(k) = g2.edge_between(i, j) {
                    edge_sum += cfg
                        .edge_kernel
                        .eval_unchecked(&e.attrs, &g2.edges()[k].attrs);
                }
            }
        }
    }
    Ok(combine_terms(edge_sum, node_sum, g1, g2, cfg.alpha))
}

/// Combines raw edge and node sums into the normalized score.
#[inline]
pub(crate) fn combine_terms(
    edge_sum: f64,
    node_sum: f64,
    g1: &ArgGraph,
    g2: &ArgGraph,
    alpha: f64,
) -> f64 {
    let (l1, l2) = (g1.edge_count(), g2.edge_count());
    let edge_term = if l1 == 0 && l2 == 0 {
        1.0
    } else if l1 == 0 || l2 == 0 {
        0.0
    } else {
        edge_sum / ((l1 * l2) as f64).sqrt()
    };
    let node_term = node_sum / ((g1.node_count() * g2.node_count()) as f64).sqrt();
    (edge_term + alpha * node_term) / (1.0 + alpha)
}

/// Graduated assignment, greedy hardening, then scoring.
pub fn match_and_score(
    g1: &ArgGraph,
    g2: &ArgGraph,
    cfg: &CompatConfig,
    p: &MatchParams,
) -> Result<(HardAssignment, f64)> {
    let soft = graduated_assignment(g1, g2, cfg, p)?;
    let hard = greedy_hard_assignment(&soft)?;
    let score = similarity_score(g1, g2, &hard, cfg)?;
    Ok((hard, score))
}

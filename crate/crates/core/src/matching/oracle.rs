//! Exhaustive matching, used as a reference for the approximate matcher.

use crate::error::{Error, Result};
use crate::graph::ArgGraph;
use crate::kernel::CompatConfig;

use super::{
    check_compatible, combine_terms, node_compat_matrix, similarity_score, HardAssignment,
};

/// Largest smaller-side node count accepted by [`brute_force_match`].
pub const BRUTE_FORCE_LIMIT: usize = 9;

struct Search<'a> {
    small: &'a ArgGraph,
    large: &'a ArgGraph,
    alpha: f64,
    node_c: Vec<f64>,
    // edge_c[k * l_large + f]: small edge k against large edge f
    edge_c: Vec<f64>,
    assign: Vec<usize>,
    used: Vec<bool>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn run(&mut self, u: usize, node_sum: f64, edge_sum: f64) {
        if u == self.small.node_count() {
            let s = combine_terms(edge_sum, node_sum, self.small, self.large, self.alpha);
            if self.best.as_ref().is_none_or(|(b, _)| s > *b) {
                self.best = Some((s, self.assign.clone()));
            }
            return;
        }
        let nl = self.large.node_count();
        let ll = self.large.edge_count();
        for i in 0..nl {
            if self.used[i] {
                continue;
            }
            let mut e_add = 0.0;
            for &(v, k) in self.small.neighbors(u) {
                if v < u {
                    if let Some(f) = self.large.edge_between(i, self.assign[v]) {
                        e_add += self.edge_c[k * ll + f];
                    }
                }
            }
            self.used[i] = true;
            self.assign[u] = i;
            self.run(u + 1, node_sum + self.node_c[u * nl + i], edge_sum + e_add);
            self.used[i] = false;
        }
    }
}

/// Best matching over every injection of the smaller graph into the larger
/// one. Matching all nodes of the smaller graph loses nothing, since every
/// compatibility is non-negative. The first maximizer in lexicographic
/// enumeration order wins.
pub fn brute_force_match(
    g1: &ArgGraph,
    g2: &ArgGraph,
    cfg: &CompatConfig,
) -> Result<(HardAssignment, f64)> {
    check_compatible(g1, g2)?;
    let swapped = g1.node_count() > g2.node_count();
    let (small, large) = if swapped { (g2, g1) } else { (g1, g2) };
    if small.node_count() > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            limit: BRUTE_FORCE_LIMIT,
            got: small.node_count(),
        });
    }
    let mut edge_c = Vec::with_capacity(small.edge_count() * large.edge_count());
    for e in small.edges() {
        for f in large.edges() {
            edge_c.push(cfg.edge_kernel.eval_unchecked(&e.attrs, &f.attrs));
        }
    }
    let mut search = Search {
        small,
        large,
        alpha: cfg.alpha,
        node_c: node_compat_matrix(small, large, cfg),
        edge_c,
        assign: vec![0; small.node_count()],
        used: vec![false; large.node_count()],
        best: None,
    };
    search.run(0, 0.0, 0.0);
    let (_, assign) = search.best.expect("at least one injection exists");
    let pairs: Vec<(usize, usize)> = assign.into_iter().enumerate().collect();
    let mut h = HardAssignment {
        pairs,
        n1: small.node_count(),
        n2: large.node_count(),
    };
    if swapped {
        h = h.transposed();
    }
    let score = similarity_score(g1, g2, &h, cfg)?;
    Ok((h, score))
}

//! Attributed relational graphs.
//!
//! An [`ArgGraph`] carries a real attribute vector on every node and on every
//! undirected edge. Graphs are validated on construction and immutable
//! afterwards, so they can be shared freely between matching workers.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// An undirected edge with its attribute vector. Endpoints are stored as given.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub attrs: Vec<f64>,
}

impl Edge {
    pub fn new(u: usize, v: usize, attrs: Vec<f64>) -> Self {
        Edge { u, v, attrs }
    }

    /// The endpoint opposite to `w`. `w` must be one of the endpoints.
    #[inline]
    pub fn other(&self, w: usize) -> usize {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }
}

/// Attributed relational graph.
///
/// Invariants (checked by [`ArgGraph::new`]):
/// - at least one node;
/// - all node attribute vectors share one dimension, likewise all edge vectors;
/// - edge endpoints exist, no self-loops, at most one edge per unordered pair;
/// - the center, if any, is an existing node.
#[derive(Debug, Clone)]
pub struct ArgGraph {
    nodes: Vec<Vec<f64>>,
    edges: Vec<Edge>,
    center: Option<usize>,
    label: Option<i64>,
    // (neighbor, edge index), sorted by neighbor
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for ArgGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.center == other.center
            && self.label == other.label
    }
}

impl ArgGraph {
    pub fn new(
        nodes: Vec<Vec<f64>>,
        edges: Vec<Edge>,
        center: Option<usize>,
        label: Option<i64>,
    ) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let node_dim = nodes[0].len();
        for (i, a) in nodes.iter().enumerate() {
            if a.len() != node_dim {
                return Err(Error::InvalidGraph(format!(
                    "node {i} has {} attributes, expected {node_dim}",
                    a.len()
                )));
            }
        }
        let edge_dim = edges.first().map(|e| e.attrs.len()).unwrap_or(0);
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({}, {}) references a node outside 0..{n}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} is a self-loop on {}",
                    e.u
                )));
            }
            if e.attrs.len() != edge_dim {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} has {} attributes, expected {edge_dim}",
                    e.attrs.len()
                )));
            }
            adjacency[e.u].push((e.v, k));
            adjacency[e.v].push((e.u, k));
        }
        for (w, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge between {w} and {}",
                    pair[0].0
                )));
            }
        }
        if let Some(c) = center {
            if c >= n {
                return Err(Error::InvalidGraph(format!("center {c} outside 0..{n}")));
            }
        }
        Ok(ArgGraph {
            nodes,
            edges,
            center,
            label,
            adjacency,
        })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn node_attrs(&self, v: usize) -> &[f64] {
        &self.nodes[v]
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `v` as `(neighbor, edge index)` pairs, ordered by neighbor.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Index of the edge joining `u` and `v`, if any.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let list = self.adjacency.get(u)?;
        list.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|pos| list[pos].1)
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    pub fn label(&self) -> Option<i64> {
        self.label
    }

    /// Dimension of node attributes.
    pub fn node_dim(&self) -> usize {
        self.nodes[0].len()
    }

    /// Dimension of edge attributes, `None` for an edgeless graph.
    pub fn edge_dim(&self) -> Option<usize> {
        self.edges.first().map(|e| e.attrs.len())
    }

    pub fn with_label(mut self, label: Option<i64>) -> Self {
        self.label = label;
        self
    }

    pub fn with_center(mut self, center: Option<usize>) -> Result<Self> {
        if let Some(c) = center {
            if c >= self.node_count() {
                return Err(Error::NodeOutOfRange {
                    node: c,
                    len: self.node_count(),
                });
            }
        }
        self.center = center;
        Ok(self)
    }

    pub fn is_finite(&self) -> bool {
        self.nodes.iter().flatten().all(|x| x.is_finite())
            && self
                .edges
                .iter()
                .flat_map(|e| &e.attrs)
                .all(|x| x.is_finite())
    }

    /// Relabels nodes so that old node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::InvalidParam(format!(
                "permutation of length {} for {n} nodes",
                perm.len()
            )));
        }
        let mut nodes = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        for (old, &new) in perm.iter().enumerate() {
            if new >= n || seen[new] {
                return Err(Error::InvalidParam("not a permutation".into()));
            }
            seen[new] = true;
            nodes[new] = self.nodes[old].clone();
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.u], perm[e.v], e.attrs.clone()))
            .collect();
        ArgGraph::new(nodes, edges, self.center.map(|c| perm[c]), self.label)
    }
}

/// Nodes within `k` hops of `v`, in ascending index order.
pub fn k_hop_nodes(g: &ArgGraph, v: usize, k: usize) -> Result<Vec<usize>> {
    if v >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            node: v,
            len: g.node_count(),
        });
    }
    let mut dist = vec![usize::MAX; g.node_count()];
    let mut queue = VecDeque::new();
    dist[v] = 0;
    queue.push_back(v);
    while let Some(w) = queue.pop_front() {
        if dist[w] == k {
            continue;
        }
        for &(x, _) in g.neighbors(w) {
            if dist[x] == usize::MAX {
                dist[x] = dist[w] + 1;
                queue.push_back(x);
            }
        }
    }
    Ok((0..g.node_count()).filter(|&w| dist[w] <= k).collect())
}

/// Induced subgraph on all nodes within `k` hops of `v`, centered on the image
/// of `v`. Node order follows the original order; edges keep their original
/// relative order. The label is not carried over.
pub fn k_hop_subgraph(g: &ArgGraph, v: usize, k: usize) -> Result<ArgGraph> {
    if k == 0 {
        return Err(Error::InvalidParam(
            "neighborhood radius must be at least 1".into(),
        ));
    }
    let keep = k_hop_nodes(g, v, k)?;
    induced_subgraph(g, &keep, Some(v))
}

/// Subgraph induced by `keep` (ascending, distinct). `center` is given in the
/// original graph's indices.
pub fn induced_subgraph(g: &ArgGraph, keep: &[usize], center: Option<usize>) -> Result<ArgGraph> {
    let mut index = vec![usize::MAX; g.node_count()];
    for (new, &old) in keep.iter().enumerate() {
        if old >= g.node_count() {
            return Err(Error::NodeOutOfRange {
                node: old,
                len: g.node_count(),
            });
        }
        index[old] = new;
    }
    let nodes = keep.iter().map(|&old| g.node_attrs(old).to_vec()).collect();
    let edges = g
        .edges()
        .iter()
        .filter(|e| index[e.u] != usize::MAX && index[e.v] != usize::MAX)
        .map(|e| Edge::new(index[e.u], index[e.v], e.attrs.clone()))
        .collect();
    let center = match center {
        Some(c) if c < g.node_count() && index[c] != usize::MAX => Some(index[c]),
        Some(c) => return Err(Error::InvalidParam(format!("center {c} not in subgraph"))),
        None => None,
    };
    ArgGraph::new(nodes, edges, center, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> ArgGraph {
        ArgGraph::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![Edge::new(0, 1, vec![0.5]), Edge::new(1, 2, vec![1.0])],
            None,
            None,
        )
        .unwrap()
    }

    fn star() -> ArgGraph {
        ArgGraph::new(
            vec![vec![0.0], vec![1.0], vec![1.0], vec![2.0]],
            vec![
                Edge::new(0, 1, vec![1.0]),
                Edge::new(0, 2, vec![1.0]),
                Edge::new(3, 0, vec![1.5]),
            ],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(ArgGraph::new(vec![], vec![], None, None).is_err());
        let nodes = vec![vec![0.0]; 3];
        assert!(ArgGraph::new(nodes.clone(), vec![Edge::new(0, 5, vec![])], None, None).is_err());
        assert!(ArgGraph::new(nodes.clone(), vec![Edge::new(1, 1, vec![])], None, None).is_err());
        let dup = vec![Edge::new(0, 1, vec![]), Edge::new(1, 0, vec![])];
        assert!(ArgGraph::new(nodes.clone(), dup, None, None).is_err());
        let ragged = vec![Edge::new(0, 1, vec![1.0]), Edge::new(1, 2, vec![])];
        assert!(ArgGraph::new(nodes.clone(), ragged, None, None).is_err());
        assert!(ArgGraph::new(vec![vec![0.0], vec![]], vec![], None, None).is_err());
        assert!(ArgGraph::new(nodes, vec![], Some(3), None).is_err());
    }

    #[test]
    fn star_hub_one_hop_is_whole_graph() {
        let g = star();
        let sub = k_hop_subgraph(&g, 0, 1).unwrap();
        assert_eq!(sub.node_count(), 4);
        assert_eq!(sub.edge_count(), 3);
        assert_eq!(sub.center(), Some(0));
    }

    #[test]
    fn path_truncation_and_closure() {
        let g = path3();
        let sub = k_hop_subgraph(&g, 0, 1).unwrap();
        assert_eq!(sub.nodes(), &[vec![0.0], vec![1.0]]);
        assert_eq!(sub.edges(), &[Edge::new(0, 1, vec![0.5])]);
        assert_eq!(sub.center(), Some(0));

        let whole = k_hop_subgraph(&g, 0, 2).unwrap();
        assert_eq!(whole.node_count(), 3);
        assert_eq!(whole.edge_count(), 2);
        assert_eq!(whole.center(), Some(0));

        let from_end = k_hop_subgraph(&g, 2, 1).unwrap();
        assert_eq!(from_end.nodes(), &[vec![1.0], vec![2.0]]);
        assert_eq!(from_end.center(), Some(1));
    }

    #[test]
    fn k_hop_rejects_bad_center_and_radius() {
        let g = path3();
        assert!(matches!(
            k_hop_subgraph(&g, 3, 1),
            Err(Error::NodeOutOfRange { node: 3, len: 3 })
        ));
        assert!(k_hop_subgraph(&g, 0, 0).is_err());
    }

    #[test]
    fn edge_lookup_is_symmetric() {
        let g = star();
        assert_eq!(g.edge_between(0, 3), Some(2));
        assert_eq!(g.edge_between(3, 0), Some(2));
        assert_eq!(g.edge_between(1, 2), None);
    }

    #[test]
    fn permutation_relabels_everything() {
        let g = star().with_center(Some(0)).unwrap();
        let p = g.permuted(&[3, 2, 1, 0]).unwrap();
        assert_eq!(p.node_attrs(3), &[0.0]);
        assert_eq!(p.center(), Some(3));
        assert_eq!(
            p.edge_between(3, 0).map(|k| p.edges()[k].attrs[0]),
            Some(1.5)
        );
        assert!(g.permuted(&[0, 0, 1, 2]).is_err());
    }
}

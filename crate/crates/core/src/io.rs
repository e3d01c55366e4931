//! Text serialization for graphs and datasets.
//!
//! A graph is one JSON object:
//!
//! ```text
//! {"nodes":[{"id":0,"attrs":[1.0]},...],"edges":[{"u":0,"v":1,"attrs":[0.5]},...],"center":0,"label":3}
//! ```
//!
//! `center` and `label` are optional. A dataset file holds one graph object per
//! line; blank lines are ignored. Floats are written in shortest round-trip
//! form, so save-then-load is bit-exact.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ArgGraph, Edge};

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct NodeRecord {
    id: usize,
    attrs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct EdgeRecord {
    u: usize,
    v: usize,
    attrs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct GraphRecord {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<i64>,
}

impl From<&ArgGraph> for GraphRecord {
    fn from(g: &ArgGraph) -> Self {
        GraphRecord {
            nodes: g
                .nodes()
                .iter()
                .enumerate()
                .map(|(id, attrs)| NodeRecord {
                    id,
                    attrs: attrs.clone(),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u,
                    v: e.v,
                    attrs: e.attrs.clone(),
                })
                .collect(),
            center: g.center(),
            label: g.label(),
        }
    }
}

impl GraphRecord {
    fn into_graph(self, record: &str) -> Result<ArgGraph> {
        let n = self.nodes.len();
        let mut slots: Vec<Option<Vec<f64>>> = vec![None; n];
        for node in self.nodes {
            if node.id >= n {
                return Err(Error::parse(
                    record,
                    format!("node id {} is not dense (graph has {n} nodes)", node.id),
                ));
            }
            if slots[node.id].is_some() {
                return Err(Error::parse(
                    record,
                    format!("duplicate node id {}", node.id),
                ));
            }
            slots[node.id] = Some(node.attrs);
        }
        let nodes: Vec<Vec<f64>> = slots.into_iter().map(|s| s.unwrap_or_default()).collect();
        let edges = self
            .edges
            .into_iter()
            .map(|e| Edge::new(e.u, e.v, e.attrs))
            .collect();
        ArgGraph::new(nodes, edges, self.center, self.label).map_err(|e| match e {
            Error::InvalidGraph(msg) => Error::parse(record, msg),
            other => other,
        })
    }
}

/// Serializes a graph to its single-line JSON form.
pub fn graph_to_string(g: &ArgGraph) -> String {
    serde_json::to_string(&GraphRecord::from(g)).expect("graph records always serialize")
}

/// Parses a graph from JSON. `record` names the source in error messages.
pub fn graph_from_str(text: &str, record: &str) -> Result<ArgGraph> {
    let rec: GraphRecord =
        serde_json::from_str(text).map_err(|e| Error::parse(record, e.to_string()))?;
    rec.into_graph(record)
}

pub fn save_graph(path: impl AsRef<Path>, g: &ArgGraph) -> Result<()> {
    let path = path.as_ref();
    let mut text = graph_to_string(g);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<ArgGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    graph_from_str(text.trim(), &path.display().to_string())
}

pub fn write_dataset<W: Write>(mut out: W, graphs: &[ArgGraph]) -> std::io::Result<()> {
    for g in graphs {
        writeln!(out, "{}", graph_to_string(g))?;
    }
    out.flush()
}

/// Reads a dataset, one graph per line. `source` prefixes record names.
pub fn read_dataset<R: BufRead>(input: R, source: &str) -> Result<Vec<ArgGraph>> {
    let mut graphs = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let record = format!("{source}:{}", lineno + 1);
        let line = line.map_err(|e| Error::parse(&record, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        graphs.push(graph_from_str(line, &record)?);
    }
    Ok(graphs)
}

pub fn save_dataset(path: impl AsRef<Path>, graphs: &[ArgGraph]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(std::io::BufWriter::new(file), graphs).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<ArgGraph>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dangling_edge_is_reported_with_record() {
        let text = r#"{"nodes":[{"id":0,"attrs":[0]},{"id":1,"attrs":[0]},{"id":2,"attrs":[0]}],
                      "edges":[{"u":0,"v":5,"attrs":[1]}]}"#;
        let err = graph_from_str(text, "g.json").unwrap_err();
        match err {
            Error::Parse { record, message } => {
                assert_eq!(record, "g.json");
                assert!(message.contains("edge 0"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let good = graph_to_string(&ArgGraph::new(vec![vec![1.0]], vec![], None, Some(2)).unwrap());
        let text = format!("{good}\n\n{{\"nodes\": 3}}\n");
        let err = read_dataset(text.as_bytes(), "data.jsonl").unwrap_err();
        assert!(matches!(err, Error::Parse { ref record, .. } if record == "data.jsonl:3"));
    }

    #[test]
    fn inconsistent_attr_dims_fail() {
        let text = r#"{"nodes":[{"id":0,"attrs":[0]},{"id":1,"attrs":[0,1]}],"edges":[]}"#;
        assert!(matches!(
            graph_from_str(text, "x"),
            Err(Error::Parse { .. })
        ));
        let sparse = r#"{"nodes":[{"id":0,"attrs":[0]},{"id":2,"attrs":[0]}],"edges":[]}"#;
        assert!(graph_from_str(sparse, "x").is_err());
    }

    #[test]
    fn empty_dataset_is_empty() {
        assert!(read_dataset("".as_bytes(), "empty").unwrap().is_empty());
    }

    #[test]
    fn node_ids_may_arrive_out_of_order() {
        let text = r#"{"nodes":[{"id":1,"attrs":[7]},{"id":0,"attrs":[3]}],"edges":[{"u":1,"v":0,"attrs":[]}],"center":1}"#;
        let g = graph_from_str(text, "x").unwrap();
        assert_eq!(g.node_attrs(0), &[3.0]);
        assert_eq!(g.center(), Some(1));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = ArgGraph::new(
            vec![vec![0.1, -2.5e-300], vec![1.0 / 3.0, 7.0]],
            vec![Edge::new(1, 0, vec![std::f64::consts::PI])],
            Some(1),
            Some(4),
        )
        .unwrap();
        let path = dir.path().join("g.json");
        save_graph(&path, &g).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);

        let ds = vec![g.clone(), g.with_label(None)];
        let dpath = dir.path().join("d.jsonl");
        save_dataset(&dpath, &ds).unwrap();
        assert_eq!(load_dataset(&dpath).unwrap(), ds);
    }

    fn arb_graph() -> impl Strategy<Value = ArgGraph> {
        (1usize..7, 0usize..3, 0usize..3).prop_flat_map(|(n, nd, ed)| {
            let nodes = prop::collection::vec(
                prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), nd),
                n,
            );
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            let m = pairs.len();
            let mask = prop::collection::vec(any::<bool>(), m);
            let eattrs = prop::collection::vec(prop::collection::vec(-1e6f64..1e6, ed), m);
            let center = prop::option::of(0..n);
            let label = prop::option::of(-5i64..5);
            (nodes, mask, eattrs, center, label).prop_map(
                move |(nodes, mask, eattrs, center, label)| {
                    let edges = pairs
                        .iter()
                        .zip(mask)
                        .zip(eattrs)
                        .filter(|((_, keep), _)| *keep)
                        .map(|((&(u, v), _), a)| Edge::new(u, v, a))
                        .collect();
                    ArgGraph::new(nodes, edges, center, label).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(g in arb_graph()) {
            let back = graph_from_str(&graph_to_string(&g), "p").unwrap();
            prop_assert_eq!(back.node_count(), g.node_count());
            prop_assert_eq!(back.edge_count(), g.edge_count());
            for (a, b) in back.nodes().iter().flatten().zip(g.nodes().iter().flatten()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back, g);
        }
    }
}

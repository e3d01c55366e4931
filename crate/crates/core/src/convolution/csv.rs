//! Plain CSV output of node-level and graph-level features.
//!
//! Node features: `graph_id,node_id,f_0,...`. Graph features:
//! `graph_id,label,g_0,...` with an empty label cell for unlabeled graphs.
//! Values use the shortest representation that parses back to the same float.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFeatureRow {
    pub graph_id: usize,
    pub label: Option<i64>,
    pub features: Vec<f64>,
}

fn header<W: Write>(out: &mut W, lead: &str, prefix: &str, n: usize) -> std::io::Result<()> {
    write!(out, "{lead}")?;
    for j in 0..n {
        write!(out, ",{prefix}_{j}")?;
    }
    writeln!(out)
}

pub fn write_node_features_csv<W: Write>(
    mut out: W,
    features: &[FeatureMatrix],
) -> std::io::Result<()> {
    let n = features.first().map_or(0, |f| f.rows.ncols());
    header(&mut out, "graph_id,node_id", "f", n)?;
    for f in features {
        for (v, row) in f.rows.rows().into_iter().enumerate() {
            write!(out, "{},{v}", f.graph_id)?;
            for x in row {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
    }
    out.flush()
}

pub fn write_graph_features_csv<W: Write>(
    mut out: W,
    rows: &[GraphFeatureRow],
) -> std::io::Result<()> {
    let n = rows.first().map_or(0, |r| r.features.len());
    header(&mut out, "graph_id,label", "g", n)?;
    for r in rows {
        write!(out, "{},", r.graph_id)?;
        if let Some(l) = r.label {
            write!(out, "{l}")?;
        }
        for x in &r.features {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn read_graph_features_csv<R: BufRead>(input: R, source: &str) -> Result<Vec<GraphFeatureRow>> {
    let mut lines = input.lines().enumerate();
    let width = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::parse(format!("{source}:1"), e.to_string()))?;
            let cols: Vec<&str> = line.trim().split(',').collect();
            if cols.len() < 2 || cols[0] != "graph_id" || cols[1] != "label" {
                return Err(Error::parse(
                    format!("{source}:1"),
                    "expected header graph_id,label,g_0,...",
                ));
            }
            cols.len()
        }
        None => return Err(Error::Empty("feature file")),
    };
    let mut out = Vec::new();
    for (i, line) in lines {
        let record = format!("{source}:{}", i + 1);
        let line = line.map_err(|e| Error::parse(&record, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != width {
            return Err(Error::parse(
                &record,
                format!("expected {width} columns, found {}", cols.len()),
            ));
        }
        let graph_id = cols[0]
            .parse()
            .map_err(|e| Error::parse(&record, format!("bad graph_id: {e}")))?;
        let label = match cols[1] {
            "" => None,
            s => Some(
                s.parse()
                    .map_err(|e| Error::parse(&record, format!("bad label: {e}")))?,
            ),
        };
        let features = cols[2..]
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::parse(&record, format!("bad value `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(GraphFeatureRow {
            graph_id,
            label,
            features,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn graph_rows_round_trip() {
        let rows = vec![
            GraphFeatureRow {
                graph_id: 0,
                label: Some(3),
                features: vec![0.1, -1.0 / 3.0],
            },
            GraphFeatureRow {
                graph_id: 4,
                label: None,
                features: vec![1e-300, 2.0],
            },
        ];
        let mut buf = Vec::new();
        write_graph_features_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("graph_id,label,g_0,g_1\n"));
        assert_eq!(read_graph_features_csv(text.as_bytes(), "f").unwrap(), rows);
    }

    #[test]
    fn node_rows_layout() {
        let f = vec![FeatureMatrix {
            graph_id: 2,
            rows: array![[0.5, 1.0], [0.25, 0.0]],
        }];
        let mut buf = Vec::new();
        write_node_features_csv(&mut buf, &f).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "graph_id,node_id,f_0,f_1\n2,0,0.5,1\n2,1,0.25,0\n"
        );
    }

    #[test]
    fn ragged_rows_fail() {
        let text = "graph_id,label,g_0\n0,1,0.5,0.7\n";
        assert!(matches!(
            read_graph_features_csv(text.as_bytes(), "f"),
            Err(Error::Parse { .. })
        ));
    }
}

//! Graph text format and its JSON sidecar.
//!
//! ```text
//! graph <vertex_count> <edge_count>
//! u v
//! ...
//! ```
//! Edges are 0-indexed with `u < v`, sorted lexicographically.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, LevelCount, LevelMap, RootedGraph};

/// Provenance and structure stored beside a graph file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphMetadata {
    pub generator: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub root: Option<usize>,
    #[serde(default)]
    pub levels: Option<LevelMap>,
    #[serde(default)]
    pub level_histogram: Option<Vec<LevelCount>>,
    #[serde(default)]
    pub diameter_constant: Option<f64>,
}

impl GraphMetadata {
    pub fn new(generator: impl Into<String>, params: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            generator: generator.into(),
            params,
            seed,
            ..Self::default()
        }
    }

    pub fn with_rooted(mut self, h: &RootedGraph) -> Self {
        self.root = Some(h.root);
        self.level_histogram = h.levels.as_ref().map(LevelMap::histogram);
        self.levels = h.levels.clone();
        self
    }
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * (g.edge_count() + 1));
    writeln!(out, "graph {} {}", g.vertex_count(), g.edge_count()).expect("string write");
    // edges() yields u < v in CSR order, which is already sorted
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").expect("string write");
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, m) = match fields.as_slice() {
        ["graph", n, m] => (
            n.parse::<usize>().map_err(|e| parse_err(1, format!("vertex count: {e}")))?,
            m.parse::<usize>().map_err(|e| parse_err(1, format!("edge count: {e}")))?,
        ),
        _ => return Err(parse_err(1, "expected `graph <vertex_count> <edge_count>`".into())),
    };
    let mut edges = Vec::with_capacity(m);
    let mut prev: Option<(usize, usize)> = None;
    for (i, line) in lines {
        let line_no = i + 1;
        let mut it = line.split_whitespace();
        let mut field = |name: &str| -> Result<usize> {
            it.next()
                .ok_or_else(|| parse_err(line_no, format!("missing {name}")))?
                .parse::<usize>()
                .map_err(|e| parse_err(line_no, format!("{name}: {e}")))
        };
        let (u, v) = (field("u")?, field("v")?);
        if it.next().is_some() {
            return Err(parse_err(line_no, "trailing fields".into()));
        }
        if u >= v || v >= n {
            return Err(parse_err(line_no, format!("edge ({u}, {v}) needs u < v < {n}")));
        }
        if prev.is_some_and(|p| p >= (u, v)) {
            return Err(parse_err(line_no, "edges must be sorted and distinct".into()));
        }
        prev = Some((u, v));
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(parse_err(1, format!("header promises {m} edges, found {}", edges.len())));
    }
    Graph::from_edges(n, edges)
}

/// `<path>.json`, next to the graph file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn save_graph(path: &Path, g: &Graph, meta: &GraphMetadata) -> Result<()> {
    fs::write(path, format_graph(g))?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

/// Reads a graph and, when present, its sidecar.
pub fn load_graph(path: &Path) -> Result<(Graph, Option<GraphMetadata>)> {
    let g = parse_graph(&fs::read_to_string(path)?)?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        let meta: GraphMetadata = serde_json::from_str(&fs::read_to_string(side)?)?;
        if let Some(root) = meta.root {
            g.check_vertex(root)?;
        }
        if let Some(levels) = &meta.levels {
            if levels.level.len() != g.vertex_count() {
                return Err(Error::Config("sidecar level map does not match the graph".into()));
            }
        }
        Some(meta)
    } else {
        None
    };
    Ok((g, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{standard_graph, StandardKind};

    #[test]
    fn text_round_trip() {
        let g = standard_graph(StandardKind::Torus, &[4, 5]).unwrap();
        let text = format_graph(&g);
        assert!(text.starts_with("graph 20 40\n"));
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "graph 3\n",
            "graph 3 1\n1 0\n",
            "graph 3 2\n0 1\n0 1\n",
            "graph 3 2\n0 1\n",
            "graph 3 1\n0 3\n",
            "graph 3 1\n0 x\n",
        ] {
            assert!(matches!(parse_graph(bad), Err(Error::Parse { .. })), "{bad:?}");
        }
    }

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.graph");
        let g = standard_graph(StandardKind::Cycle, &[6]).unwrap();
        let h = RootedGraph::new(g.clone(), 2).unwrap().with_levels(LevelMap::uniform(6, 1)).unwrap();
        let meta = GraphMetadata::new("cycle", serde_json::json!({"dims": [6]}), Some(4)).with_rooted(&h);
        save_graph(&path, &g, &meta).unwrap();
        let (back, side) = load_graph(&path).unwrap();
        assert_eq!(back, g);
        assert_eq!(side.unwrap(), meta);
    }
}

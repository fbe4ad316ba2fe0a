//! Graph file formats.
//!
//! * JSON: `{"n": 4, "edges": [[0, 1], [1, 2]]}`
//! * Edge list: one `from to` pair per line, `#` starts a comment. A comment of
//!   the form `# n 6` (or `# n = 6`) fixes the node count; otherwise it is one
//!   more than the largest id seen.
//!
//! Self-loops, duplicate edges and out-of-range ids are hard errors.

use std::fs;
use std::path::Path;

use iabc_core::{DiGraph, GraphError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn from_graph(g: &DiGraph) -> Self {
        GraphFile {
            n: g.n(),
            edges: g.edges().map(|(a, b)| [a.0, b.0]).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<DiGraph, GraphError> {
        DiGraph::from_edges(self.n, self.edges.iter().map(|&[a, b]| (a, b)))
    }
}

/// Parse either format; JSON is recognised by a leading `{`.
pub fn parse_graph(text: &str) -> Result<DiGraph, FormatError> {
    if text.trim_start().starts_with('{') {
        let file: GraphFile = serde_json::from_str(text)?;
        Ok(file.to_graph()?)
    } else {
        parse_edge_list(text)
    }
}

pub fn read_graph(path: &Path) -> Result<DiGraph, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_graph(&text)
}

pub fn parse_edge_list(text: &str) -> Result<DiGraph, FormatError> {
    let mut declared_n = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((body, comment)) => (body, Some(comment)),
            None => (raw, None),
        };
        if let Some(n) = comment.and_then(node_count_directive) {
            declared_n = Some(n);
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [from, to] => {
                let parse = |s: &str| {
                    s.parse::<usize>().map_err(|_| FormatError::Parse {
                        line,
                        msg: format!("`{s}` is not a node id"),
                    })
                };
                let (from, to) = (parse(from)?, parse(to)?);
                if from == to {
                    return Err(FormatError::Parse {
                        line,
                        msg: format!("self-loop on node {from}"),
                    });
                }
                edges.push((from, to));
            }
            _ => {
                return Err(FormatError::Parse {
                    line,
                    msg: "expected `from to`".into(),
                })
            }
        }
    }
    let inferred = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    let n = declared_n.unwrap_or(inferred);
    Ok(DiGraph::from_edges(n, edges)?)
}

fn node_count_directive(comment: &str) -> Option<usize> {
    let rest = comment.trim().strip_prefix('n')?;
    let rest = rest.trim_start();
    let rest = rest.strip_prefix('=').unwrap_or(rest);
    rest.trim().parse().ok()
}

pub fn graph_to_json(g: &DiGraph) -> String {
    serde_json::to_string(&GraphFile::from_graph(g)).expect("graph serializes")
}

pub fn graph_to_edge_list(g: &DiGraph) -> String {
    let mut out = format!("# n {}\n", g.n());
    for (a, b) in g.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

//! Text dataset formats.
//!
//! Edge list: one whitespace-separated `u v` pair of node ids per line,
//! `#` starts a comment. Node table: CSV with header
//! `id,sensitive,label,f0,f1,…`; label `-1` marks an unlabeled node. Node
//! ids are remapped to `0..n` in node-table order.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::Graph;
use crate::error::{Error, Result};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

pub fn load_graph(edge_list_path: &Path, node_table_path: &Path) -> Result<Graph> {
    let nodes = fs::read_to_string(node_table_path).map_err(|e| Error::io(node_table_path, e))?;
    let edges = fs::read_to_string(edge_list_path).map_err(|e| Error::io(edge_list_path, e))?;
    parse_graph(&edges, edge_list_path, &nodes, node_table_path)
}

fn parse_graph(edges: &str, edge_path: &Path, nodes: &str, node_path: &Path) -> Result<Graph> {
    let mut lines = nodes.lines().enumerate();
    let (_, header) = lines
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(node_path, 1, "node table is empty"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[0] != "id" || cols[1] != "sensitive" || cols[2] != "label" {
        return Err(parse_err(node_path, 1, "header must start with id,sensitive,label"));
    }
    let num_features = cols.len() - 3;

    let mut index: HashMap<i64, usize> = HashMap::new();
    let mut sensitive = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        let line_no = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(parse_err(
                node_path,
                line_no,
                format!("expected {} columns, found {}", cols.len(), fields.len()),
            ));
        }
        let id: i64 = fields[0]
            .parse()
            .map_err(|_| parse_err(node_path, line_no, format!("bad node id {:?}", fields[0])))?;
        let s: i64 = fields[1]
            .parse()
            .map_err(|_| parse_err(node_path, line_no, format!("bad sensitive value {:?}", fields[1])))?;
        let l: i64 = fields[2]
            .parse()
            .map_err(|_| parse_err(node_path, line_no, format!("bad label {:?}", fields[2])))?;
        if s < 0 {
            return Err(Error::validation(format!("node {id}: sensitive value {s} is negative")));
        }
        let label = match l {
            -1 => None,
            0 | 1 => Some(l as u8),
            _ => return Err(Error::validation(format!("node {id}: label {l} not in {{-1, 0, 1}}"))),
        };
        for f in &fields[3..] {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(node_path, line_no, format!("bad feature value {f:?}")))?;
            values.push(v);
        }
        if index.insert(id, sensitive.len()).is_some() {
            return Err(parse_err(node_path, line_no, format!("duplicate node id {id}")));
        }
        sensitive.push(s as usize);
        labels.push(label);
    }
    let n = sensitive.len();
    let num_groups = sensitive.iter().copied().max().map_or(0, |m| m + 1);
    if num_groups < 2 {
        return Err(Error::validation("node table must contain at least two sensitive groups"));
    }

    let mut pairs = Vec::new();
    for (lineno, line) in edges.lines().enumerate() {
        let line_no = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(edge_path, line_no, "expected two node ids"));
        }
        let mut ends = [0usize; 2];
        for (k, tok) in toks.iter().enumerate() {
            let id: i64 = tok
                .parse()
                .map_err(|_| parse_err(edge_path, line_no, format!("bad node id {tok:?}")))?;
            ends[k] = *index
                .get(&id)
                .ok_or_else(|| Error::validation(format!("{}:{line_no}: unknown node id {id}", edge_path.display())))?;
        }
        pairs.push((ends[0], ends[1]));
    }

    let features = Array2::from_shape_vec((n, num_features), values).expect("row lengths checked");
    let mut g = Graph::from_edges(n, pairs, features, sensitive, num_groups, labels)?;
    g.standardize_features();
    Ok(g)
}

/// Writes `g` in the edge-list format, each undirected edge once.
pub fn write_edge_list(g: &Graph, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..g.num_nodes() {
        for &j in g.neighbors(i).iter().filter(|&&j| j > i) {
            writeln!(out, "{i} {j}").unwrap();
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the node table of `g` with ids `0..n`.
pub fn write_node_table(g: &Graph, path: &Path) -> Result<()> {
    let mut out = String::from("id,sensitive,label");
    for f in 0..g.num_features() {
        write!(out, ",f{f}").unwrap();
    }
    out.push('\n');
    for i in 0..g.num_nodes() {
        let label = g.labels()[i].map_or(-1, i64::from);
        write!(out, "{i},{},{label}", g.group(i)).unwrap();
        for v in g.features().row(i) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

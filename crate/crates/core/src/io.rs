//! Plain-text graph files.
//!
//! ```text
//! # comment
//! n m
//! u v w      (m lines, 1-based vertex ids, real weight)
//! ```
//!
//! Each edge is listed once and mirrored on load; listing it twice is an error.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

pub fn read_graph<R: Read>(reader: R) -> Result<WeightedGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut toks = text.split_whitespace();
        match header {
            None => {
                let n = field(toks.next(), lineno, "vertex count")?;
                let m = field(toks.next(), lineno, "edge count")?;
                header = Some((n, m));
            }
            Some((n, _)) => {
                let u: usize = field(toks.next(), lineno, "vertex id")?;
                let v: usize = field(toks.next(), lineno, "vertex id")?;
                let w: f64 = field(toks.next(), lineno, "weight")?;
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(parse_err(lineno, format!("vertex id out of range 1..={n}")));
                }
                if !w.is_finite() || w == 0.0 {
                    return Err(parse_err(lineno, format!("edge weight must be finite and nonzero, got {w}")));
                }
                edges.push((lineno, u - 1, v - 1, w));
            }
        }
        if toks.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens"));
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(0, "missing `n m` header"))?;
    if edges.len() != m {
        return Err(parse_err(0, format!("header promises {m} edges, found {}", edges.len())));
    }
    let mut seen = std::collections::HashSet::new();
    for &(lineno, u, v, _) in &edges {
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(parse_err(lineno, format!("duplicate edge {} {}", u + 1, v + 1)));
        }
    }
    let triples: Vec<_> = edges.into_iter().map(|(_, u, v, w)| (u, v, w)).collect();
    WeightedGraph::from_edges(n, &triples)
}

pub fn write_graph<W: Write>(mut out: W, g: &WeightedGraph) -> Result<()> {
    let edges = g.edges();
    writeln!(out, "{} {}", g.n(), edges.len())?;
    for (u, v, w) in edges {
        writeln!(out, "{} {} {}", u + 1, v + 1, w)?;
    }
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    read_graph(File::open(path)?)
}

pub fn save_graph(path: impl AsRef<Path>, g: &WeightedGraph) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_graph(&mut out, g)?;
    out.flush()?;
    Ok(())
}

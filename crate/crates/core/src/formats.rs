//! Text formats for graphs and vertex orderings.
//!
//! Edge list:
//!
//! ```text
//! # n=8 p=0.5 band=3 seed=42
//! 1 2
//! 1 4
//! ```
//!
//! Vertices are 1-based, each edge is written once with `u < v`.
//!
//! Ordering: `n` lines, line `i` holding the 1-based vertex placed at
//! position `i`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph_model::{ModelParams, RandomLinearGraph};
use crate::permutation::Permutation;

pub fn write_edge_list<W: Write>(graph: &RandomLinearGraph, mut out: W) -> std::io::Result<()> {
    let params = graph.params();
    writeln!(
        out,
        "# n={} p={} band={} seed={}",
        params.n(),
        params.p(),
        params.band(),
        graph.seed()
    )?;
    for (u, v) in graph.edges() {
        writeln!(out, "{} {}", u + 1, v + 1)?;
    }
    out.flush()
}

fn parse_header(line: &str) -> Result<(ModelParams, u64)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(1, "missing header line `# n=.. p=.. band=.. seed=..`"))?;
    let (mut n, mut p, mut band, mut seed) = (None, None, None, None);
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("header field `{field}` is not key=value")))?;
        let bad = || Error::parse(1, format!("bad value in header field `{field}`"));
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
            "p" => p = Some(value.parse::<f64>().map_err(|_| bad())?),
            "band" => band = Some(value.parse::<usize>().map_err(|_| bad())?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
            other => return Err(Error::parse(1, format!("unknown header key `{other}`"))),
        }
    }
    let missing = |k: &str| Error::parse(1, format!("header lacks `{k}`"));
    let n = n.ok_or_else(|| missing("n"))?;
    let p = p.ok_or_else(|| missing("p"))?;
    let band = band.ok_or_else(|| missing("band"))?;
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let params = ModelParams::with_band(n, p, band).map_err(|e| Error::parse(1, e.to_string()))?;
    Ok((params, seed))
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<RandomLinearGraph> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "empty edge list")),
    };
    let (params, seed) = parse_header(header.trim())?;
    let n = params.n();
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(lineno, format!("expected `u v`, got `{line}`")));
        };
        let parse_vertex = |s: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| Error::parse(lineno, format!("`{s}` is not a vertex index")))?;
            if v == 0 || v > n {
                return Err(Error::parse(
                    lineno,
                    format!("vertex {v} out of range 1..={n}"),
                ));
            }
            Ok(v - 1)
        };
        let (u, v) = (parse_vertex(a)?, parse_vertex(b)?);
        if u == v {
            return Err(Error::parse(lineno, format!("self loop at vertex {}", u + 1)));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(Error::parse(
                lineno,
                format!("duplicate edge {} {}", key.0 + 1, key.1 + 1),
            ));
        }
        edges.push(key);
    }
    RandomLinearGraph::from_edges(params, seed, edges)
}

pub fn write_ordering<W: Write>(order: &Permutation, mut out: W) -> std::io::Result<()> {
    for v in order.to_one_based() {
        writeln!(out, "{v}")?;
    }
    out.flush()
}

pub fn read_ordering<R: BufRead>(input: R) -> Result<Permutation> {
    let mut entries = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: usize = line
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("`{line}` is not a vertex index")))?;
        entries.push(v);
    }
    Permutation::from_one_based(&entries)
}

pub fn save_edge_list(graph: &RandomLinearGraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_edge_list(graph, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_edge_list(path: &Path) -> Result<RandomLinearGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_edge_list(BufReader::new(file))
}

pub fn save_ordering(order: &Permutation, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_ordering(order, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_ordering(path: &Path) -> Result<Permutation> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ordering(BufReader::new(file))
}

//! The line-oriented graph file format.
//!
//! ```text
//! c a comment
//! p edge <n> <m>
//! e <u> <v> <cost>
//! o <u> <v> <rank>
//! ```
//!
//! Vertices are 0-based. Without `o` lines the ordering is the order of the
//! `e` lines; with them, every edge must get exactly one rank in `1..=m`.

use std::collections::HashMap;
use std::fmt::Write as _;

use cpmatch::graph::{EdgeId, EdgeOrdering, Graph, Vertex};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based; 0 when the problem is the file as a whole.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("missing `p edge <n> <m>` header")]
    MissingHeader,
    #[error("duplicate header")]
    DuplicateHeader,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("unknown line type `{0}`")]
    UnknownLine(String),
    #[error("vertex {vertex} out of range for {n} vertices")]
    BadVertex { vertex: i64, n: usize },
    #[error("loop at vertex {0}")]
    Loop(Vertex),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("header declares {declared} edges, file has {found}")]
    EdgeCount { declared: usize, found: usize },
    #[error("ordering line names {0}-{1}, which is not an edge")]
    UnknownEdge(Vertex, Vertex),
    #[error("edge ordering is not a bijection: {0}")]
    NotBijective(String),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn fields<const K: usize>(line: usize, rest: &[&str]) -> Result<[i64; K], ParseError> {
    if rest.len() != K {
        return Err(err(line, ParseErrorKind::Malformed(format!("expected {K} fields, found {}", rest.len()))));
    }
    let mut out = [0; K];
    for (slot, tok) in out.iter_mut().zip(rest) {
        *slot = tok.parse().map_err(|_| err(line, ParseErrorKind::Malformed(format!("`{tok}` is not an integer"))))?;
    }
    Ok(out)
}

fn vertex(line: usize, raw: i64, n: usize) -> Result<Vertex, ParseError> {
    match usize::try_from(raw) {
        Ok(v) if v < n => Ok(v),
        _ => Err(err(line, ParseErrorKind::BadVertex { vertex: raw, n })),
    }
}

pub fn parse_graph(text: &str) -> Result<(Graph, EdgeOrdering), ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges: Vec<(Vertex, Vertex, i64)> = Vec::new();
    let mut index: HashMap<(Vertex, Vertex), usize> = HashMap::new();
    let mut ranks: Vec<(usize, Vertex, Vertex, i64)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let Some((&tag, rest)) = tokens.split_first() else { continue };
        match tag {
            "c" => {}
            "p" => {
                if header.is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateHeader));
                }
                if rest.first() != Some(&"edge") {
                    return Err(err(line, ParseErrorKind::Malformed("header must read `p edge <n> <m>`".into())));
                }
                let [n, m] = fields::<2>(line, &rest[1..])?;
                if n < 0 || m < 0 {
                    return Err(err(line, ParseErrorKind::Malformed("negative size in header".into())));
                }
                header = Some((n as usize, m as usize, line));
            }
            "e" => {
                let (n, _, _) = header.ok_or(err(line, ParseErrorKind::MissingHeader))?;
                let [u, v, cost] = fields::<3>(line, rest)?;
                let (u, v) = (vertex(line, u, n)?, vertex(line, v, n)?);
                if u == v {
                    return Err(err(line, ParseErrorKind::Loop(u)));
                }
                let key = (u.min(v), u.max(v));
                if index.contains_key(&key) {
                    return Err(err(line, ParseErrorKind::DuplicateEdge(key.0, key.1)));
                }
                index.insert(key, edges.len());
                edges.push((u, v, cost));
            }
            "o" => {
                let (n, _, _) = header.ok_or(err(line, ParseErrorKind::MissingHeader))?;
                let [u, v, rank] = fields::<3>(line, rest)?;
                ranks.push((line, vertex(line, u, n)?, vertex(line, v, n)?, rank));
            }
            other => return Err(err(line, ParseErrorKind::UnknownLine(other.to_string()))),
        }
    }

    let (n, declared, header_line) = header.ok_or(err(0, ParseErrorKind::MissingHeader))?;
    if declared != edges.len() {
        return Err(err(header_line, ParseErrorKind::EdgeCount { declared, found: edges.len() }));
    }
    let m = edges.len();
    let graph = Graph::new(n, edges).expect("edges were validated line by line");

    if ranks.is_empty() {
        return Ok((graph, EdgeOrdering::identity(m)));
    }
    let mut rank_of = vec![0usize; m];
    let mut taken = vec![false; m];
    for &(line, u, v, rank) in &ranks {
        let e = *index.get(&(u.min(v), u.max(v))).ok_or(err(line, ParseErrorKind::UnknownEdge(u, v)))?;
        if rank < 1 || rank as usize > m {
            return Err(err(line, ParseErrorKind::NotBijective(format!("rank {rank} outside 1..={m}"))));
        }
        let r = rank as usize;
        if rank_of[e] != 0 {
            return Err(err(line, ParseErrorKind::NotBijective(format!("edge {u}-{v} ranked twice"))));
        }
        if taken[r - 1] {
            return Err(err(line, ParseErrorKind::NotBijective(format!("rank {r} used twice"))));
        }
        rank_of[e] = r;
        taken[r - 1] = true;
    }
    if ranks.len() != m {
        let last = ranks.last().map_or(0, |r| r.0);
        return Err(err(last, ParseErrorKind::NotBijective(format!("{} of {m} edges ranked", ranks.len()))));
    }
    let sigma = EdgeOrdering::from_ranks(rank_of).expect("ranks checked above");
    Ok((graph, sigma))
}

/// Writes `g` in edge-id order, followed by `o` lines when `sigma` is not the
/// identity.
pub fn emit_graph(g: &Graph, sigma: &EdgeOrdering) -> String {
    let mut s = String::new();
    writeln!(s, "p edge {} {}", g.vertex_count(), g.edge_count()).unwrap();
    for edge in g.edges() {
        writeln!(s, "e {} {} {}", edge.u, edge.v, edge.cost).unwrap();
    }
    if *sigma != EdgeOrdering::identity(g.edge_count()) {
        for (k, &e) in sigma.order().iter().enumerate() {
            let edge = g.edge(e);
            writeln!(s, "o {} {} {}", edge.u, edge.v, k + 1).unwrap();
        }
    }
    s
}

/// `"u-v"`, the key used for edges in output and traces.
pub fn edge_label(g: &Graph, e: EdgeId) -> String {
    g.edge(e).to_string()
}

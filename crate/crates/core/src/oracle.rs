//! Brute-force ground truth for small graphs.

use thiserror::Error;

use crate::graph::{EdgeId, EdgeOrdering, Graph};

pub const DEFAULT_VERTEX_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("graph has {n} vertices, oracle cap is {cap}")]
pub struct OracleCapExceeded {
    pub n: usize,
    pub cap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// `None` iff the graph has no perfect matching.
    pub min_cost: Option<i64>,
    /// Every perfect matching of minimum cost, each sorted by edge id.
    pub matchings: Vec<Vec<EdgeId>>,
}

/// Enumerates all perfect matchings by always pairing the lowest free vertex.
pub fn brute_force_matchings(g: &Graph, cap: usize) -> Result<OracleResult, OracleCapExceeded> {
    let n = g.vertex_count();
    if n > cap {
        return Err(OracleCapExceeded { n, cap });
    }
    let mut incident: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    for e in g.edge_ids() {
        incident[g.edge(e).u].push(e);
        incident[g.edge(e).v].push(e);
    }
    let mut search = Search {
        g,
        incident,
        matched: vec![false; n],
        current: Vec::new(),
        best: None,
        found: Vec::new(),
    };
    if n % 2 == 0 {
        search.recurse(0);
    }
    let mut matchings = search.found;
    for m in &mut matchings {
        m.sort();
    }
    matchings.sort();
    Ok(OracleResult { min_cost: search.best, matchings })
}

struct Search<'a> {
    g: &'a Graph,
    incident: Vec<Vec<EdgeId>>,
    matched: Vec<bool>,
    current: Vec<EdgeId>,
    best: Option<i64>,
    found: Vec<Vec<EdgeId>>,
}

impl Search<'_> {
    fn recurse(&mut self, cost: i64) {
        let Some(u) = self.matched.iter().position(|m| !m) else {
            match self.best {
                Some(b) if cost > b => {}
                Some(b) if cost == b => self.found.push(self.current.clone()),
                _ => {
                    self.best = Some(cost);
                    self.found = vec![self.current.clone()];
                }
            }
            return;
        };
        self.matched[u] = true;
        for k in 0..self.incident[u].len() {
            let e = self.incident[u][k];
            let edge = *self.g.edge(e);
            let w = if edge.u == u { edge.v } else { edge.u };
            if self.matched[w] {
                continue;
            }
            self.matched[w] = true;
            self.current.push(e);
            self.recurse(cost + edge.cost);
            self.current.pop();
            self.matched[w] = false;
        }
        self.matched[u] = false;
    }
}

/// The matching whose incidence vector, read in increasing `σ`, is
/// lexicographically smallest. Panics on an empty input.
pub fn lex_tie_break(matchings: &[Vec<EdgeId>], sigma: &EdgeOrdering) -> Vec<EdgeId> {
    let key = |m: &Vec<EdgeId>| {
        let mut bits = vec![false; sigma.len()];
        for &e in m {
            bits[sigma.rank(e) - 1] = true;
        }
        bits
    };
    let mut best = matchings.first().expect("at least one matching").clone();
    let mut best_key = key(&best);
    for m in &matchings[1..] {
        let k = key(m);
        if k < best_key {
            best = m.clone();
            best_key = k;
        }
    }
    best.sort();
    best
}

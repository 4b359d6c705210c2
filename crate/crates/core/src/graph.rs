//! Graphs, edge orderings, odd vertex sets and laminar families, plus the
//! support / odd-cycle decomposition of half-integral edge vectors.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{ratio, Rational};

pub type Vertex = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// An undirected edge with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub cost: i64,
}

impl Edge {
    pub fn has(&self, w: Vertex) -> bool {
        self.u == w || self.v == w
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("loop at vertex {0}")]
    Loop(Vertex),
    #[error("parallel edge {0}-{1}")]
    ParallelEdge(Vertex, Vertex),
    #[error("edge ordering is not a bijection onto 1..={0}")]
    NotBijective(usize),
    #[error("set of size {size} is not an odd set with 3 <= |S| <= {max}")]
    BadOddSet { size: usize, max: usize },
    #[error("edge vector has {got} entries, graph has {expected} edges")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge {edge} has value {value}, which is not in {{0, 1/2, 1}}")]
    HalfIntegralityViolation { edge: Edge, value: Rational },
    #[error("fractional component is not an odd cycle: {0}")]
    StructureViolation(String),
}

/// A simple undirected graph with integer edge costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    index: HashMap<(Vertex, Vertex), EdgeId>,
}

impl Graph {
    /// Builds a graph from `(u, v, cost)` triples; endpoints are normalised so
    /// that `u < v` but the input order of edges is preserved.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex, i64)>) -> Result<Self, GraphError> {
        let mut g = Graph { n, edges: Vec::new(), index: HashMap::new() };
        for (a, b, cost) in edges {
            for w in [a, b] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if a == b {
                return Err(GraphError::Loop(a));
            }
            let (u, v) = (a.min(b), a.max(b));
            if g.index.contains_key(&(u, v)) {
                return Err(GraphError::ParallelEdge(u, v));
            }
            g.index.insert((u, v), EdgeId(g.edges.len()));
            g.edges.push(Edge { u, v, cost });
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn find_edge(&self, a: Vertex, b: Vertex) -> Option<EdgeId> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Original costs as rationals, indexed by edge id.
    pub fn costs(&self) -> Vec<Rational> {
        self.edges.iter().map(|e| Rational::from_integer(e.cost.into())).collect()
    }

    pub fn degree(&self, w: Vertex) -> usize {
        self.edges.iter().filter(|e| e.has(w)).count()
    }

    fn mask(&self, s: &[Vertex]) -> Result<Vec<bool>, GraphError> {
        let mut mask = vec![false; self.n];
        for &w in s {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n: self.n });
            }
            mask[w] = true;
        }
        Ok(mask)
    }

    /// `δ(S)`: edges with exactly one endpoint in `s`.
    pub fn cut_edges(&self, s: &[Vertex]) -> Result<Vec<EdgeId>, GraphError> {
        let mask = self.mask(s)?;
        Ok(self.edge_ids().filter(|&e| mask[self.edge(e).u] != mask[self.edge(e).v]).collect())
    }

    /// Edges with both endpoints in `s`.
    pub fn inner_edges(&self, s: &[Vertex]) -> Result<Vec<EdgeId>, GraphError> {
        let mask = self.mask(s)?;
        Ok(self.edge_ids().filter(|&e| mask[self.edge(e).u] && mask[self.edge(e).v]).collect())
    }
}

/// A bijection `σ: E → {1, …, |E|}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeOrdering {
    rank: Vec<usize>,
    order: Vec<EdgeId>,
}

impl EdgeOrdering {
    /// `rank[e]` is `σ(e)`, 1-based.
    pub fn from_ranks(rank: Vec<usize>) -> Result<Self, GraphError> {
        let m = rank.len();
        let mut order = vec![None; m];
        for (e, &r) in rank.iter().enumerate() {
            if r == 0 || r > m || order[r - 1].is_some() {
                return Err(GraphError::NotBijective(m));
            }
            order[r - 1] = Some(EdgeId(e));
        }
        Ok(EdgeOrdering { rank, order: order.into_iter().map(Option::unwrap).collect() })
    }

    /// `order[k]` is the edge with `σ = k + 1`.
    pub fn from_order(order: Vec<EdgeId>) -> Result<Self, GraphError> {
        let m = order.len();
        let mut rank = vec![0; m];
        for (k, e) in order.iter().enumerate() {
            if e.0 >= m || rank[e.0] != 0 {
                return Err(GraphError::NotBijective(m));
            }
            rank[e.0] = k + 1;
        }
        Ok(EdgeOrdering { rank, order })
    }

    pub fn identity(m: usize) -> Self {
        EdgeOrdering { rank: (1..=m).collect(), order: (0..m).map(EdgeId).collect() }
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    pub fn rank(&self, e: EdgeId) -> usize {
        self.rank[e.0]
    }

    /// The edge with `σ(e) = k` (1-based).
    pub fn edge_at(&self, k: usize) -> EdgeId {
        self.order[k - 1]
    }

    /// Edges in increasing `σ`.
    pub fn order(&self) -> &[EdgeId] {
        &self.order
    }
}

/// An odd vertex set with `3 ≤ |S| ≤ n − 3`, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OddSet(Vec<Vertex>);

impl OddSet {
    pub fn new(members: impl IntoIterator<Item = Vertex>, n: usize) -> Result<Self, GraphError> {
        let mut v: Vec<Vertex> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if let Some(&w) = v.iter().find(|&&w| w >= n) {
            return Err(GraphError::VertexOutOfRange { vertex: w, n });
        }
        let size = v.len();
        if size % 2 == 0 || size < 3 || size + 3 > n {
            return Err(GraphError::BadOddSet { size, max: n.saturating_sub(3) });
        }
        Ok(OddSet(v))
    }

    pub fn members(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, w: Vertex) -> bool {
        self.0.binary_search(&w).is_ok()
    }

    pub fn is_subset(&self, other: &OddSet) -> bool {
        self.0.iter().all(|&w| other.contains(w))
    }

    pub fn intersects(&self, other: &[Vertex]) -> bool {
        other.iter().any(|&w| self.contains(w))
    }
}

impl fmt::Display for OddSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|w| w.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// True iff every pair of sets is disjoint or nested.
pub fn is_laminar<S: AsRef<[Vertex]>>(family: &[S]) -> bool {
    let sets: Vec<std::collections::BTreeSet<Vertex>> =
        family.iter().map(|s| s.as_ref().iter().copied().collect()).collect();
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            let overlap = a.intersection(b).next().is_some();
            if overlap && !a.is_subset(b) && !b.is_subset(a) {
                return false;
            }
        }
    }
    true
}

impl AsRef<[Vertex]> for OddSet {
    fn as_ref(&self) -> &[Vertex] {
        &self.0
    }
}

/// A laminar family of odd sets, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaminarFamily(Vec<OddSet>);

impl LaminarFamily {
    pub fn empty() -> Self {
        LaminarFamily(Vec::new())
    }

    /// `None` if the sets are not laminar.
    pub fn new(sets: impl IntoIterator<Item = OddSet>) -> Option<Self> {
        let mut v: Vec<OddSet> = sets.into_iter().collect();
        v.sort();
        v.dedup();
        is_laminar(&v).then_some(LaminarFamily(v))
    }

    pub fn sets(&self) -> &[OddSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, s: &OddSet) -> bool {
        self.0.binary_search(s).is_ok()
    }
}

/// A vector indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeVector(pub Vec<Rational>);

impl EdgeVector {
    pub fn zeros(m: usize) -> Self {
        EdgeVector(vec![Rational::zero(); m])
    }

    pub fn get(&self, e: EdgeId) -> &Rational {
        &self.0[e.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `x(T)` for a set of edges.
    pub fn sum_over(&self, edges: &[EdgeId]) -> Rational {
        edges.iter().map(|e| &self.0[e.0]).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(crate::rational::is_integral)
    }

    /// `supp(x)`: edges with a nonzero value.
    pub fn support(&self) -> Vec<EdgeId> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_zero()).map(EdgeId).collect()
    }
}

/// Decomposes the ½-valued edges of a half-integral `x` into vertex-disjoint odd
/// cycles. Unit edges are ignored. Cycles are returned in traversal order,
/// starting at their smallest vertex, sorted by that vertex.
pub fn odd_cycles(g: &Graph, x: &EdgeVector) -> Result<Vec<Vec<Vertex>>, GraphError> {
    if x.len() != g.edge_count() {
        return Err(GraphError::LengthMismatch { expected: g.edge_count(), got: x.len() });
    }
    let half = ratio(1, 2);
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); g.vertex_count()];
    for e in g.edge_ids() {
        let value = x.get(e);
        if value.is_zero() || value.is_one() {
            continue;
        }
        if *value != half {
            return Err(GraphError::HalfIntegralityViolation { edge: *g.edge(e), value: value.clone() });
        }
        let edge = g.edge(e);
        adj[edge.u].push(edge.v);
        adj[edge.v].push(edge.u);
    }
    if let Some(w) = (0..g.vertex_count()).find(|&w| !adj[w].is_empty() && adj[w].len() != 2) {
        return Err(GraphError::StructureViolation(format!(
            "vertex {w} has {} half edges",
            adj[w].len()
        )));
    }
    let mut seen = vec![false; g.vertex_count()];
    let mut cycles = Vec::new();
    for start in 0..g.vertex_count() {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let (mut prev, mut cur) = (start, adj[start][0].min(adj[start][1]));
        while cur != start {
            if seen[cur] {
                return Err(GraphError::StructureViolation(format!("walk revisits vertex {cur}")));
            }
            seen[cur] = true;
            cycle.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
        }
        if cycle.len() % 2 == 0 {
            return Err(GraphError::StructureViolation(format!("even cycle through {start}")));
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn triangle_plus_edge() -> Graph {
        Graph::new(4, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1)]).unwrap()
    }

    #[test]
    fn rejects_loops_parallel_and_range() {
        assert_eq!(Graph::new(2, [(0, 0, 1)]), Err(GraphError::Loop(0)));
        assert_eq!(Graph::new(2, [(0, 1, 1), (1, 0, 2)]), Err(GraphError::ParallelEdge(0, 1)));
        assert!(matches!(Graph::new(2, [(0, 2, 1)]), Err(GraphError::VertexOutOfRange { .. })));
    }

    #[test]
    fn cut_of_full_set_is_empty() {
        let g = triangle_plus_edge();
        assert!(g.cut_edges(&[0, 1, 2, 3]).unwrap().is_empty());
        assert_eq!(g.cut_edges(&[3]).unwrap(), vec![EdgeId(3)]);
        assert!(g.cut_edges(&[7]).is_err());
    }

    #[test]
    fn laminarity() {
        assert!(is_laminar(&[vec![5, 15, 13], vec![10, 11, 14]]));
        assert!(!is_laminar(&[vec![1, 2, 3], vec![3, 4, 5]]));
        assert!(is_laminar::<Vec<usize>>(&[]));
        assert!(is_laminar(&[vec![1, 2, 3], vec![0, 1, 2, 3, 4]]));
    }

    #[test]
    fn odd_set_bounds() {
        assert!(OddSet::new([0, 1, 2], 6).is_ok());
        assert!(OddSet::new([0, 1, 2], 5).is_err());
        assert!(OddSet::new([0, 1], 8).is_err());
        assert!(OddSet::new([0, 1, 2, 3], 8).is_err());
    }

    #[test]
    fn orderings_must_be_bijective() {
        assert!(EdgeOrdering::from_ranks(vec![2, 1, 3]).is_ok());
        assert!(EdgeOrdering::from_ranks(vec![1, 1, 3]).is_err());
        assert!(EdgeOrdering::from_ranks(vec![0, 1, 2]).is_err());
        let o = EdgeOrdering::from_order(vec![EdgeId(2), EdgeId(0), EdgeId(1)]).unwrap();
        assert_eq!(o.rank(EdgeId(2)), 1);
        assert_eq!(o.edge_at(3), EdgeId(1));
    }

    #[test]
    fn cycles_of_half_integral_vector() {
        let g = Graph::new(6, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1)]).unwrap();
        let x = EdgeVector(vec![ratio(1, 2); 6]);
        assert_eq!(odd_cycles(&g, &x).unwrap(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let integral = EdgeVector(vec![int(1), int(0), int(0), int(0), int(1), int(0)]);
        assert!(odd_cycles(&g, &integral).unwrap().is_empty());
    }

    #[test]
    fn non_half_integral_is_reported() {
        let g = triangle_plus_edge();
        let x = EdgeVector(vec![ratio(1, 3), ratio(2, 3), int(0), int(0)]);
        match odd_cycles(&g, &x) {
            Err(GraphError::HalfIntegralityViolation { edge, value }) => {
                assert_eq!((edge.u, edge.v), (0, 1));
                assert_eq!(value, ratio(1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn even_component_is_a_structure_violation() {
        let g = Graph::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap();
        let x = EdgeVector(vec![ratio(1, 2); 4]);
        assert!(matches!(odd_cycles(&g, &x), Err(GraphError::StructureViolation(_))));
    }
}

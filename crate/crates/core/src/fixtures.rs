//! Counterexample instances with their documented iterates, and a seeded
//! generator of random instances that are guaranteed to have a perfect
//! matching.
//!
//! Each fixture lists its edges in `σ` order, so the identity ordering over
//! the edge list is the documented ordering.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeId, EdgeOrdering, EdgeVector, Graph, Vertex};
use crate::rational::{int, ratio, Rational};

/// A primal iterate as drawn in a figure, together with the family it was
/// computed under.
#[derive(Clone, Debug)]
pub struct ExpectedIterate {
    pub figure: &'static str,
    pub iteration: usize,
    pub family: Vec<Vec<Vertex>>,
    pub x: EdgeVector,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub graph: Graph,
    pub sigma: EdgeOrdering,
    /// A minimum-cost perfect matching drawn for the instance, if any.
    pub matching: Vec<EdgeId>,
    pub iterates: Vec<ExpectedIterate>,
}

impl Fixture {
    fn new(name: &'static str, n: usize, sigma_order: &[(Vertex, Vertex)]) -> Self {
        let graph = Graph::new(n, sigma_order.iter().map(|&(u, v)| (u, v, 1))).expect("fixture graph is simple");
        let sigma = EdgeOrdering::identity(graph.edge_count());
        Fixture { name, graph, sigma, matching: Vec::new(), iterates: Vec::new() }
    }

    fn edge(&self, u: Vertex, v: Vertex) -> EdgeId {
        self.graph.find_edge(u, v).unwrap_or_else(|| panic!("{}: no edge {u}-{v}", self.name))
    }

    fn vector(&self, groups: &[(Rational, &[(Vertex, Vertex)])]) -> EdgeVector {
        let mut x = EdgeVector::zeros(self.graph.edge_count());
        for (value, edges) in groups {
            for &(u, v) in *edges {
                x.0[self.edge(u, v).0] = value.clone();
            }
        }
        x
    }

    fn with_matching(mut self, edges: &[(Vertex, Vertex)]) -> Self {
        let mut m: Vec<EdgeId> = edges.iter().map(|&(u, v)| self.edge(u, v)).collect();
        m.sort();
        self.matching = m;
        self
    }

    fn with_iterate(
        mut self,
        figure: &'static str,
        family: &[&[Vertex]],
        groups: &[(Rational, &[(Vertex, Vertex)])],
    ) -> Self {
        let x = self.vector(groups);
        let family = family
            .iter()
            .map(|s| {
                let mut s = s.to_vec();
                s.sort_unstable();
                s
            })
            .collect();
        let iteration = self.iterates.len() + 1;
        self.iterates.push(ExpectedIterate { figure, iteration, family, x });
        self
    }

    pub fn iterate(&self, iteration: usize) -> &ExpectedIterate {
        &self.iterates[iteration - 1]
    }
}

/// The 16-vertex "dancing robot" with unit costs.
pub fn dancing_robot() -> Fixture {
    let sigma_order = [
        (1, 5),
        (2, 13),
        (10, 14),
        (0, 3),
        (4, 12),
        (5, 13),
        (7, 12),
        (5, 15),
        (3, 7),
        (8, 9),
        (0, 1),
        (11, 14),
        (0, 12),
        (4, 13),
        (2, 6),
        (10, 11),
        (9, 11),
        (4, 11),
        (8, 11),
        (13, 15),
    ];
    Fixture::new("dancing_robot", 16, &sigma_order)
        .with_matching(&[(0, 3), (1, 5), (2, 6), (7, 12), (8, 9), (4, 11), (10, 14), (13, 15)])
        .with_iterate(
            "Fig. 2",
            &[],
            &[
                (int(1), &[(4, 12), (8, 9), (0, 1), (2, 6), (3, 7)]),
                (ratio(1, 2), &[(5, 13), (5, 15), (10, 14), (10, 11), (11, 14), (13, 15)]),
            ],
        )
        .with_iterate(
            "Fig. 3",
            &[&[5, 15, 13], &[10, 11, 14]],
            &[
                (int(1), &[(2, 6), (3, 7), (10, 14)]),
                (
                    ratio(1, 2),
                    &[(4, 12), (8, 9), (0, 12), (0, 1), (1, 5), (4, 13), (5, 15), (8, 11), (9, 11), (13, 15)],
                ),
            ],
        )
        .with_iterate(
            "Fig. 4",
            &[&[0, 1, 5, 15, 13, 4, 12], &[8, 11, 9]],
            &[
                (int(1), &[(8, 9), (2, 6)]),
                (ratio(2, 3), &[(4, 12), (0, 1), (3, 7), (10, 14), (13, 15)]),
                (ratio(1, 3), &[(0, 3), (1, 5), (4, 11), (5, 13), (5, 15), (7, 12), (10, 11), (11, 14)]),
            ],
        )
}

/// The dancing robot stretched so that a cut value of `1/5` appears.
pub fn altered_robot() -> Fixture {
    let sigma_order = [
        (1, 5),
        (2, 13),
        (10, 14),
        (0, 3),
        (17, 19),
        (4, 12),
        (5, 13),
        (7, 12),
        (16, 18),
        (5, 15),
        (3, 7),
        (18, 19),
        (8, 9),
        (0, 16),
        (1, 17),
        (11, 14),
        (0, 12),
        (16, 17),
        (4, 13),
        (2, 6),
        (10, 11),
        (9, 11),
        (4, 11),
        (8, 11),
        (13, 15),
    ];
    Fixture::new("altered_robot", 20, &sigma_order)
        .with_matching(&[(8, 9), (0, 12), (1, 5), (2, 6), (3, 7), (4, 11), (10, 14), (13, 15), (16, 17), (18, 19)])
        .with_iterate(
            "Fig. 5, first iteration",
            &[],
            &[
                (int(1), &[(4, 12), (8, 9), (0, 16), (2, 6), (3, 7), (1, 17), (18, 19)]),
                (ratio(1, 2), &[(5, 13), (5, 15), (10, 14), (10, 11), (11, 14), (13, 15)]),
            ],
        )
        .with_iterate(
            "Fig. 5, second iteration",
            &[&[5, 15, 13], &[10, 11, 14]],
            &[
                (int(1), &[(2, 6), (3, 7), (10, 14), (18, 19)]),
                (
                    ratio(1, 2),
                    &[
                        (4, 12),
                        (8, 9),
                        (0, 12),
                        (0, 16),
                        (1, 5),
                        (4, 13),
                        (5, 15),
                        (8, 11),
                        (9, 11),
                        (13, 15),
                        (16, 17),
                        (1, 17),
                    ],
                ),
            ],
        )
        .with_iterate(
            "Fig. 5, third iteration",
            &[&[4, 12, 0, 16, 17, 1, 5, 15, 13], &[8, 11, 9]],
            &[
                (int(1), &[(8, 9), (2, 6)]),
                (ratio(4, 5), &[(4, 12), (0, 16), (3, 7), (1, 17), (18, 19)]),
                (ratio(3, 5), &[(10, 14), (13, 15)]),
                (ratio(2, 5), &[(5, 13), (5, 15), (10, 11), (11, 14)]),
                (ratio(1, 5), &[(0, 3), (1, 5), (4, 11), (7, 12), (16, 18), (17, 19)]),
            ],
        )
}

/// The 10-vertex graph on which the unperturbed method alternates forever
/// between two half-integral iterates.
///
/// The figure captioned "Even iterations" is the lexicographically minimal
/// optimum with no cuts (edge 3-9, rank 5, is the first place the two
/// vectors differ), so it is the iterate of iteration 1 and the "Odd
/// iterations" vector follows. The families are the cycles of the previous
/// iterate; no cut survives because every set gets dual value 0.
pub fn cycling_graph() -> Fixture {
    let sigma_order = [
        (5, 9),
        (3, 5),
        (4, 5),
        (1, 6),
        (3, 9),
        (0, 8),
        (5, 7),
        (3, 4),
        (1, 5),
        (5, 6),
        (0, 3),
        (0, 1),
        (1, 7),
        (0, 9),
        (2, 6),
        (3, 8),
        (2, 5),
        (4, 8),
    ];
    Fixture::new("cycling", 10, &sigma_order)
        .with_iterate(
            "Fig. 7",
            &[],
            &[
                (int(1), &[(0, 9), (1, 7)]),
                (ratio(1, 2), &[(5, 6), (4, 8), (2, 5), (3, 4), (3, 8), (2, 6)]),
            ],
        )
        .with_iterate(
            "Fig. 6",
            &[&[2, 5, 6], &[3, 4, 8]],
            &[
                (int(1), &[(4, 8), (2, 6)]),
                (ratio(1, 2), &[(1, 5), (0, 9), (5, 7), (0, 3), (1, 7), (3, 9)]),
            ],
        )
}

pub fn all() -> Vec<Fixture> {
    vec![dancing_robot(), altered_robot(), cycling_graph()]
}

/// A random graph on `n` vertices (n even) with about `m` edges, costs in
/// `1..=max_cost` and a random ordering. A random perfect matching is planted
/// first, so the graph always has one. `m` is clamped to `[n/2, n(n−1)/2]`.
pub fn random_instance(n: usize, m: usize, max_cost: i64, seed: u64) -> (Graph, EdgeOrdering) {
    assert!(n % 2 == 0, "a planted perfect matching needs an even vertex count");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices: Vec<Vertex> = (0..n).collect();
    vertices.shuffle(&mut rng);
    let mut pairs: Vec<(Vertex, Vertex)> = vertices.chunks(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
    let mut others: Vec<(Vertex, Vertex)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|e| !pairs.contains(e))
        .collect();
    others.shuffle(&mut rng);
    let target = m.clamp(n / 2, n * (n - 1) / 2);
    pairs.extend(others.into_iter().take(target - n / 2));
    pairs.shuffle(&mut rng);
    let edges: Vec<(Vertex, Vertex, i64)> =
        pairs.into_iter().map(|(u, v)| (u, v, rng.gen_range(1..=max_cost.max(1)))).collect();
    let graph = Graph::new(n, edges).expect("generated graph is simple");
    let mut order: Vec<EdgeId> = graph.edge_ids().collect();
    order.shuffle(&mut rng);
    let sigma = EdgeOrdering::from_order(order).expect("shuffled ids form a bijection");
    (graph, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching_lp::is_primal_feasible;
    use crate::graph::OddSet;

    #[test]
    fn sizes() {
        let d = dancing_robot();
        assert_eq!((d.graph.vertex_count(), d.graph.edge_count()), (16, 20));
        let a = altered_robot();
        assert_eq!((a.graph.vertex_count(), a.graph.edge_count()), (20, 25));
        let c = cycling_graph();
        assert_eq!((c.graph.vertex_count(), c.graph.edge_count()), (10, 18));
    }

    #[test]
    fn documented_orderings() {
        let d = dancing_robot();
        assert_eq!(d.sigma.rank(d.graph.find_edge(1, 5).unwrap()), 1);
        assert_eq!(d.sigma.rank(d.graph.find_edge(13, 15).unwrap()), 20);
        let a = altered_robot();
        assert_eq!(a.sigma.rank(a.graph.find_edge(1, 5).unwrap()), 1);
        let c = cycling_graph();
        assert_eq!(c.sigma.rank(c.graph.find_edge(5, 9).unwrap()), 1);
        assert_eq!(c.sigma.rank(c.graph.find_edge(4, 8).unwrap()), 18);
    }

    #[test]
    fn unit_costs() {
        for f in all() {
            assert!(f.graph.edges().iter().all(|e| e.cost == 1), "{}", f.name);
        }
    }

    #[test]
    fn documented_iterates_are_feasible_for_their_families() {
        for f in all() {
            let n = f.graph.vertex_count();
            for it in &f.iterates {
                let family: Vec<OddSet> =
                    it.family.iter().map(|s| OddSet::new(s.iter().copied(), n).unwrap()).collect();
                assert!(is_primal_feasible(&f.graph, &family, &it.x).unwrap(), "{} {}", f.name, it.figure);
            }
        }
    }

    #[test]
    fn random_instances_are_reproducible_and_matchable() {
        let (g1, s1) = random_instance(10, 20, 10, 7);
        let (g2, s2) = random_instance(10, 20, 10, 7);
        assert_eq!(g1, g2);
        assert_eq!(s1, s2);
        assert_eq!(g1.edge_count(), 20);
        let r = crate::oracle::brute_force_matchings(&g1, 20).unwrap();
        assert!(r.min_cost.is_some());
    }
}

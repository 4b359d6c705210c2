mod common;

use common::{random_dense_lp, rng};
use cpmatch::cpm::{solve_naive, solve_perturbed_reference, solve_unperturbed, CpmError, StopReason};
use cpmatch::fixtures::random_instance;
use cpmatch::graph::{EdgeOrdering, EdgeVector, Graph};
use cpmatch::lexmin::{lex_min_optimal, LexMinOutcome};
use cpmatch::lp::LpOutcome;
use cpmatch::matching_lp::build_primal;
use cpmatch::oracle::{brute_force_matchings, lex_tie_break, DEFAULT_VERTEX_CAP};
use cpmatch::rational::{int, ratio, Rational};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_graph(n: usize, p: f64, max_cost: i64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(p) {
                edges.push((u, v, r.gen_range(1..=max_cost)));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lexmin_is_the_smallest_optimal_vertex(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dense = random_dense_lp(&mut r);
        let lp = dense.to_lp();
        let mut order: Vec<usize> = (0..dense.c.len()).collect();
        order.shuffle(&mut r);
        let vertices = dense.vertices();
        match lex_min_optimal(&lp, &order).unwrap() {
            LexMinOutcome::Optimal(out) => {
                prop_assert_eq!(out.solves, 1 + order.len());
                let best = vertices.iter().map(|(_, v)| v.clone()).min().unwrap();
                prop_assert_eq!(&out.objective, &best);
                let key = |x: &[Rational]| order.iter().map(|&j| x[j].clone()).collect::<Vec<_>>();
                let expected = vertices.iter().filter(|(_, v)| *v == best).map(|(x, _)| key(x)).min().unwrap();
                let got: Vec<Rational> = (0..dense.c.len()).map(|j| out.x[&j].clone()).collect();
                prop_assert_eq!(key(&got), expected);
            }
            LexMinOutcome::Infeasible => prop_assert!(vertices.is_empty()),
            LexMinOutcome::Unbounded => prop_assert!(false, "boxed program reported unbounded"),
        }
    }

    #[test]
    fn cut_value_is_degree_sum_minus_twice_the_inside(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(4..=10);
        let g = random_graph(n, 0.5, 5, seed);
        let x = EdgeVector((0..g.edge_count()).map(|_| ratio(r.gen_range(0..=6), r.gen_range(1..=6))).collect());
        let s: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
        let degrees: Rational = s.iter().map(|&v| x.sum_over(&g.cut_edges(&[v]).unwrap())).sum();
        let inside = x.sum_over(&g.inner_edges(&s).unwrap());
        prop_assert_eq!(x.sum_over(&g.cut_edges(&s).unwrap()), degrees - int(2) * inside);
    }
}

#[test]
fn unit_cost_graphs_match_the_oracle() {
    for seed in 0..20u64 {
        let n = 6 + 2 * (seed as usize % 3);
        let (g, sigma) = random_instance(n, 2 * n, 1, seed);
        let oracle = brute_force_matchings(&g, DEFAULT_VERTEX_CAP).unwrap();
        let expected = lex_tie_break(&oracle.matchings, &sigma);
        let a = solve_unperturbed(&g, &sigma).unwrap();
        let b = solve_perturbed_reference(&g, &sigma).unwrap();
        assert_eq!(a.matching, expected, "seed {seed}");
        assert_eq!(b.matching, expected, "seed {seed}");
        assert_eq!(a.cost, int(oracle.min_cost.unwrap()));
        let naive = solve_naive(&g, &sigma, 20);
        if naive.stop == StopReason::Integral {
            assert_eq!(naive.cost(&g), Some(a.cost.clone()), "seed {seed}");
        }
    }
}

#[test]
fn graphs_without_a_perfect_matching_are_rejected() {
    let mut rejected = 0;
    for seed in 0..40u64 {
        let n = [6, 8, 9][seed as usize % 3];
        let g = random_graph(n, 0.3, 4, 1000 + seed);
        let sigma = EdgeOrdering::identity(g.edge_count());
        let oracle = brute_force_matchings(&g, DEFAULT_VERTEX_CAP).unwrap();
        let result = solve_unperturbed(&g, &sigma);
        match oracle.min_cost {
            None => {
                assert_eq!(result, Err(CpmError::NoPerfectMatching), "seed {seed}");
                rejected += 1;
            }
            Some(c) => assert_eq!(result.unwrap().cost, int(c), "seed {seed}"),
        }
    }
    assert!(rejected > 5);
}

#[test]
fn bipartite_degree_lp_is_integral() {
    for seed in 0..30u64 {
        let mut r = rng(seed);
        let half = r.gen_range(2..=5);
        let mut edges = Vec::new();
        for u in 0..half {
            for v in half..2 * half {
                if r.gen_bool(0.6) {
                    edges.push((u, v, r.gen_range(1..=9)));
                }
            }
        }
        let g = Graph::new(2 * half, edges).unwrap();
        let oracle = brute_force_matchings(&g, DEFAULT_VERTEX_CAP).unwrap();
        let lp = build_primal(&g, &g.costs(), &[]).unwrap();
        match lp.solve() {
            LpOutcome::Optimal(sol) => assert_eq!(Some(sol.objective), oracle.min_cost.map(int), "seed {seed}"),
            LpOutcome::Infeasible => assert_eq!(oracle.min_cost, None),
            LpOutcome::Unbounded => panic!("degree LP is bounded"),
        }
    }
}

#[test]
fn tie_break_ignores_input_order() {
    let (g, sigma) = random_instance(8, 20, 1, 99);
    let oracle = brute_force_matchings(&g, DEFAULT_VERTEX_CAP).unwrap();
    let mut shuffled = oracle.matchings.clone();
    shuffled.shuffle(&mut rng(5));
    assert_eq!(lex_tie_break(&oracle.matchings, &sigma), lex_tie_break(&shuffled, &sigma));
}

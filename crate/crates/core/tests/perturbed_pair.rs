mod common;

use common::{check_staged_solution, random_perturbed_problem, rng, three_stage_example};
use cpmatch::perturb::{check_pipeline, solve_perturbed_pair, PerturbError};
use cpmatch::rational::{int, ratio};
use proptest::prelude::*;
use std::collections::BTreeSet;

#[test]
fn three_stage_example_is_reproduced_exactly() {
    let problem = three_stage_example();
    let sol = solve_perturbed_pair(&problem).unwrap();
    assert_eq!(sol.x, vec![ratio(1, 2), int(0), ratio(1, 2)]);
    let ys: Vec<_> = sol.stages.iter().map(|s| s.y.clone()).collect();
    assert_eq!(ys, vec![vec![int(1), int(1)], vec![int(4), int(-2)], vec![int(-2), ratio(3, 2)]]);
    assert_eq!(sol.stages[1].tight_rows, BTreeSet::from([0, 1]));
    assert_eq!(sol.stages[2].removed_columns, BTreeSet::from([1]));
    assert_eq!(sol.stages[1].x, vec![ratio(1, 2), int(0), ratio(1, 2)]);
    assert!(sol.series.is_positive(&0).unwrap());
    assert!(sol.series.is_positive(&1).unwrap());
    assert_eq!(check_staged_solution(&problem, &sol), Ok(()));
}

#[test]
fn single_stage_matches_a_plain_solve() {
    let mut problem = three_stage_example();
    problem.costs.truncate(1);
    let sol = solve_perturbed_pair(&problem).unwrap();
    assert_eq!(sol.stages.len(), 1);
    assert_eq!(sol.stages[0].objective, int(2));
    assert_eq!(sol.stages[0].y, vec![int(1), int(1)]);
}

#[test]
fn tampered_solution_fails_the_pipeline_check() {
    let problem = three_stage_example();
    let mut sol = solve_perturbed_pair(&problem).unwrap();
    sol.x[0] = int(0);
    assert!(matches!(check_pipeline(&problem, &sol), Err(PerturbError::Invariant(_))));
}

#[test]
fn infeasible_first_stage_is_reported() {
    let mut problem = three_stage_example();
    problem.a.push(vec![int(-1), int(0), int(-1)]);
    problem.b.push(int(0));
    assert!(matches!(solve_perturbed_pair(&problem), Err(PerturbError::StageNotOptimal { stage: 0, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn staged_solutions_are_stagewise_optimal(seed in any::<u64>()) {
        let problem = random_perturbed_problem(&mut rng(seed));
        let sol = solve_perturbed_pair(&problem).unwrap();
        prop_assert_eq!(check_staged_solution(&problem, &sol), Ok(()));
    }
}

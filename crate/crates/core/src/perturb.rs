//! Primal-dual pairs of linear programs whose costs are perturbed by
//! `c_ε = Σ_p c_p ε^p` for an unspecified, sufficiently small `ε > 0`.
//!
//! The program is
//!
//! ```text
//! min c_εᵀx  s.t.  Ax ≥ b,  x_j ≥ 0 for j ∈ N
//! ```
//!
//! and it is solved as a sequence of exact stage programs, one per power of
//! `ε`. The optimal dual is returned as the coefficient list `(y_0, …, y_k)`
//! of `y' = Σ ε^p y_p`; `ε` is never given a value. Every "for sufficiently
//! small ε" statement is checked stage-wise: the sign of a series is the sign
//! of its first nonzero coefficient.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lp::{Domain, LinearProgram, LpOutcome, Relation, Sense};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("series at {key} starts with the negative coefficient {value} at stage {stage}")]
pub struct SignViolation {
    pub key: String,
    pub stage: usize,
    pub value: Rational,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerturbError {
    #[error("malformed problem: {0}")]
    Shape(String),
    #[error("stage {stage} program is {outcome}")]
    StageNotOptimal { stage: usize, outcome: &'static str },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Sign(#[from] SignViolation),
}

/// The coefficients `(y_0, …, y_k)` of a symbolic dual `y' = Σ ε^p y_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualSeries<K: Ord> {
    stages: Vec<BTreeMap<K, Rational>>,
}

impl<K: Ord + Clone + Debug> DualSeries<K> {
    /// All stages must share one key set.
    pub fn new(stages: Vec<BTreeMap<K, Rational>>) -> Result<Self, PerturbError> {
        if let Some(first) = stages.first() {
            for (p, s) in stages.iter().enumerate() {
                if s.len() != first.len() || !s.keys().eq(first.keys()) {
                    return Err(PerturbError::Shape(format!("stage {p} has a different key set")));
                }
            }
        }
        Ok(DualSeries { stages })
    }

    pub fn stages(&self) -> &[BTreeMap<K, Rational>] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.stages.first().into_iter().flat_map(|s| s.keys())
    }

    /// The first nonzero coefficient at `key`, with its stage.
    pub fn leading(&self, key: &K) -> Option<(usize, &Rational)> {
        self.stages
            .iter()
            .enumerate()
            .find_map(|(p, s)| s.get(key).filter(|v| !v.is_zero()).map(|v| (p, v)))
    }

    /// Whether `y'(key) ≠ 0` for small `ε`; errors if the series is negative
    /// there, which cannot happen for a sign-constrained dual.
    pub fn is_positive(&self, key: &K) -> Result<bool, SignViolation> {
        match self.leading(key) {
            None => Ok(false),
            Some((_, v)) if v.is_positive() => Ok(true),
            Some((stage, v)) => Err(SignViolation { key: format!("{key:?}"), stage, value: v.clone() }),
        }
    }
}

/// Free-function form of [`DualSeries::is_positive`].
pub fn series_is_positive<K: Ord + Clone + Debug>(series: &DualSeries<K>, key: &K) -> Result<bool, SignViolation> {
    series.is_positive(key)
}

/// `min Σ_p ε^p c_pᵀx s.t. Ax ≥ b, x_j ≥ 0 (j ∈ N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbedProblem {
    /// Row-major `m × n` matrix.
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    /// `c_0, …, c_k`, each of length `n`.
    pub costs: Vec<Vec<Rational>>,
    /// `nonnegative[j]` iff `j ∈ N`.
    pub nonnegative: Vec<bool>,
}

impl PerturbedProblem {
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.nonnegative.len()
    }

    fn validate(&self) -> Result<(), PerturbError> {
        let (m, n) = (self.rows(), self.cols());
        if self.b.len() != m {
            return Err(PerturbError::Shape(format!("b has {} entries for {m} rows", self.b.len())));
        }
        if self.a.iter().any(|r| r.len() != n) {
            return Err(PerturbError::Shape("ragged constraint matrix".into()));
        }
        if self.costs.is_empty() || self.costs.iter().any(|c| c.len() != n) {
            return Err(PerturbError::Shape("cost vectors must be nonempty and of length n".into()));
        }
        Ok(())
    }

    fn column_dot(&self, y: &[Rational], j: usize) -> Rational {
        y.iter().zip(&self.a).filter(|(yi, _)| !yi.is_zero()).map(|(yi, row)| yi * &row[j]).sum()
    }

    fn row_dot(&self, i: usize, x: &[Rational]) -> Rational {
        self.a[i].iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, xj)| a * xj).sum()
    }

    fn cost_dot(&self, p: usize, x: &[Rational]) -> Rational {
        self.costs[p].iter().zip(x).map(|(c, xj)| c * xj).sum()
    }

    /// The stage program `M_p`: columns in `removed` are dropped, rows in
    /// `tight` are equalities.
    pub fn stage_program(
        &self,
        p: usize,
        tight: &BTreeSet<usize>,
        removed: &BTreeSet<usize>,
    ) -> LinearProgram<usize, usize> {
        let mut lp = LinearProgram::new(Sense::Minimize);
        for j in (0..self.cols()).filter(|j| !removed.contains(j)) {
            let domain = if self.nonnegative[j] { Domain::NonNegative } else { Domain::Free };
            lp.add_var(j, domain).expect("fresh column");
            lp.set_objective(&j, self.costs[p][j].clone()).expect("declared column");
        }
        for i in 0..self.rows() {
            let terms = (0..self.cols())
                .filter(|j| !removed.contains(j))
                .map(|j| (j, self.a[i][j].clone()));
            let relation = if tight.contains(&i) { Relation::Eq } else { Relation::Ge };
            lp.add_row(i, terms, relation, self.b[i].clone()).expect("declared columns");
        }
        lp
    }
}

/// One stage of the pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    /// `x_p`, with zeros on removed columns.
    pub x: Vec<Rational>,
    pub y: Vec<Rational>,
    pub objective: Rational,
    /// `E` and `J` as used to build `M_p`.
    pub tight_rows: BTreeSet<usize>,
    pub removed_columns: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbedSolution {
    /// `x'`: optimal for `P(ε)` for all sufficiently small `ε > 0`.
    pub x: Vec<Rational>,
    /// `y'` as its coefficient list, keyed by row index.
    pub series: DualSeries<usize>,
    pub stages: Vec<Stage>,
}

/// Solves the perturbed primal-dual pair stage by stage.
pub fn solve_perturbed_pair(problem: &PerturbedProblem) -> Result<PerturbedSolution, PerturbError> {
    problem.validate()?;
    let (m, n) = (problem.rows(), problem.cols());
    let mut tight: BTreeSet<usize> = BTreeSet::new();
    let mut removed: BTreeSet<usize> = BTreeSet::new();
    let mut stages: Vec<Stage> = Vec::with_capacity(problem.costs.len());

    for p in 0..problem.costs.len() {
        let lp = problem.stage_program(p, &tight, &removed);
        let sol = match lp.solve() {
            LpOutcome::Optimal(sol) => sol,
            other => return Err(PerturbError::StageNotOptimal { stage: p, outcome: other.kind() }),
        };
        let x: Vec<Rational> = (0..n).map(|j| sol.value(&j)).collect();
        let y: Vec<Rational> = (0..m).map(|i| sol.dual(&i)).collect();
        stages.push(Stage {
            x,
            y: y.clone(),
            objective: sol.objective.clone(),
            tight_rows: tight.clone(),
            removed_columns: removed.clone(),
        });
        tight.extend((0..m).filter(|&i| y[i].is_positive()));
        let newly_removed: Vec<usize> = (0..n)
            .filter(|&j| problem.nonnegative[j] && !removed.contains(&j))
            .filter(|&j| problem.column_dot(&y, j) < problem.costs[p][j])
            .collect();
        removed.extend(newly_removed);
    }

    let last = stages.last().expect("at least one stage");
    let x: Vec<Rational> =
        (0..n).map(|j| if removed.contains(&j) { Rational::zero() } else { last.x[j].clone() }).collect();
    let series = DualSeries::new(
        stages.iter().map(|s| s.y.iter().cloned().enumerate().collect::<BTreeMap<_, _>>()).collect(),
    )?;
    let solution = PerturbedSolution { x, series, stages };
    check_pipeline(problem, &solution)?;
    Ok(solution)
}

fn invariant(msg: String) -> PerturbError {
    PerturbError::Invariant(msg)
}

/// Exact checks of the pipeline's output: stage monotonicity, optimality of
/// later iterates for earlier stages, feasibility of `x'`, stage-wise
/// complementary slackness and the symbolic sign conditions on `y'`.
pub fn check_pipeline(problem: &PerturbedProblem, sol: &PerturbedSolution) -> Result<(), PerturbError> {
    let (m, n) = (problem.rows(), problem.cols());
    for w in sol.stages.windows(2) {
        if !w[0].tight_rows.is_subset(&w[1].tight_rows) || !w[0].removed_columns.is_subset(&w[1].removed_columns) {
            return Err(invariant("E or J shrank between stages".into()));
        }
    }

    // x_p is optimal for every earlier stage program.
    for (p, stage) in sol.stages.iter().enumerate() {
        for (q, earlier) in sol.stages[..p].iter().enumerate() {
            let lp = problem.stage_program(q, &earlier.tight_rows, &earlier.removed_columns);
            let xp = stage.x.iter().cloned().enumerate().collect();
            if !lp.is_feasible(&xp) {
                return Err(invariant(format!("x_{p} is infeasible for stage {q}")));
            }
            if problem.cost_dot(q, &stage.x) != earlier.objective {
                return Err(invariant(format!("x_{p} is not optimal for stage {q}")));
            }
        }
    }

    // x' is feasible for P(ε).
    for i in 0..m {
        if problem.row_dot(i, &sol.x) < problem.b[i] {
            return Err(invariant(format!("x' violates row {i}")));
        }
    }
    if (0..n).any(|j| problem.nonnegative[j] && sol.x[j].is_negative()) {
        return Err(invariant("x' has a negative nonnegative column".into()));
    }

    for (p, stage) in sol.stages.iter().enumerate() {
        for j in 0..n {
            let reduced = &problem.costs[p][j] - problem.column_dot(&stage.y, j);
            let must_be_tight = !problem.nonnegative[j] || sol.x[j].is_positive();
            if must_be_tight && !reduced.is_zero() {
                return Err(invariant(format!("column {j} not tight at stage {p}")));
            }
        }
        for i in 0..m {
            if problem.row_dot(i, &sol.x) > problem.b[i] && !stage.y[i].is_zero() {
                return Err(invariant(format!("row {i} is slack at x' but y_{p}({i}) ≠ 0")));
            }
        }
    }

    // y' ≥ 0 and y'ᵀA_j ≤ c_ε(j) for j ∈ N, read off the leading coefficients.
    for i in 0..m {
        sol.series.is_positive(&i)?;
    }
    for j in (0..n).filter(|&j| problem.nonnegative[j]) {
        let leading = sol
            .stages
            .iter()
            .enumerate()
            .map(|(p, s)| &problem.costs[p][j] - problem.column_dot(&s.y, j))
            .find(|s| !s.is_zero());
        if leading.is_some_and(|s| s.is_negative()) {
            return Err(invariant(format!("dual constraint of column {j} is violated for small ε")));
        }
    }
    Ok(())
}

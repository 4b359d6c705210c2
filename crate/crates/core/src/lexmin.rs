//! Lexicographically minimal optimal solutions.
//!
//! Solve once for the optimal value `γ`, then minimise each variable in turn
//! over the optimal face, pinning it to its minimum before moving on. Every
//! stage is solved, even when the point has already stopped changing.

use indexmap::IndexMap;
use thiserror::Error;

use crate::lp::{LinearProgram, LpError, LpKey, LpOutcome, Relation, Sense};
use crate::rational::{int, Rational};

/// Row identifiers of the staged programs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LexRow<R, V> {
    Original(R),
    /// `cᵀx = γ`
    Objective,
    /// `x_v = z` for an already minimised variable.
    Fixed(V),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexMin<V: LpKey> {
    pub x: IndexMap<V, Rational>,
    pub objective: Rational,
    /// Number of LP solves performed (`1 + |order|`).
    pub solves: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LexMinOutcome<V: LpKey> {
    Optimal(LexMin<V>),
    Infeasible,
    Unbounded,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexMinError {
    #[error("order is not a permutation of the program's variables")]
    NotAPermutation,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("minimising {var} over the optimal face was {outcome}")]
    StageFailed { var: String, outcome: &'static str },
}

pub fn lex_min_optimal<V: LpKey, R: LpKey>(
    lp: &LinearProgram<V, R>,
    order: &[V],
) -> Result<LexMinOutcome<V>, LexMinError> {
    let mut seen = std::collections::HashSet::new();
    if order.len() != lp.num_vars() || !order.iter().all(|v| lp.index_of(v).is_ok() && seen.insert(v)) {
        return Err(LexMinError::NotAPermutation);
    }

    let base = match lp.solve() {
        LpOutcome::Optimal(sol) => sol,
        LpOutcome::Infeasible => return Ok(LexMinOutcome::Infeasible),
        LpOutcome::Unbounded => return Ok(LexMinOutcome::Unbounded),
    };
    let gamma = base.objective;
    let mut solves = 1;
    let mut x = base.x;

    let mut work = lp.map_rows(|r| LexRow::Original(r.clone()));
    let objective_terms: Vec<(V, Rational)> =
        lp.objective_coefs().map(|(v, c)| (v.clone(), c.clone())).collect();
    work.add_row(LexRow::Objective, objective_terms, Relation::Eq, gamma.clone())?;

    for var in order {
        let stage = work.with_objective(Sense::Minimize, [(var.clone(), int(1))])?;
        solves += 1;
        let sol = match stage.solve() {
            LpOutcome::Optimal(sol) => sol,
            other => return Err(LexMinError::StageFailed { var: format!("{var:?}"), outcome: other.kind() }),
        };
        let value = sol.value(var);
        work.add_row(LexRow::Fixed(var.clone()), [(var.clone(), int(1))], Relation::Eq, value)?;
        x = sol.x;
    }

    Ok(LexMinOutcome::Optimal(LexMin { x, objective: gamma, solves }))
}

//! Row-oriented linear programs over exact rationals.
//!
//! A [`LinearProgram`] is keyed by caller-chosen variable and row identifiers,
//! so dual values map straight back to the constraint that produced them.
//! [`LinearProgram::solve`] returns both a primal optimum and a complementary
//! dual optimum.
//!
//! Dual values follow the shadow-price convention `y_i = ∂(optimum)/∂(rhs_i)`:
//! for a minimisation `≥` rows carry `y ≥ 0` and `≤` rows carry `y ≤ 0`; for a
//! maximisation the signs are reversed. Equality rows are unrestricted.

use std::fmt::Debug;
use std::hash::Hash;

use indexmap::IndexMap;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;
use crate::simplex::{self, RawOutcome, RowData};

/// Bound requirements for LP identifiers.
pub trait LpKey: Clone + Eq + Hash + Debug {}
impl<T: Clone + Eq + Hash + Debug> LpKey for T {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    NonNegative,
    Free,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} declared twice")]
    DuplicateVariable(String),
    #[error("row {0} declared twice")]
    DuplicateRow(String),
}

#[derive(Clone, Debug)]
pub struct Row {
    /// `(variable index, coefficient)`, merged and free of zeros.
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct LinearProgram<V, R> {
    sense: Sense,
    vars: IndexMap<V, Domain>,
    objective: Vec<Rational>,
    rows: IndexMap<R, Row>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution<V: LpKey, R: LpKey> {
    pub x: IndexMap<V, Rational>,
    pub y: IndexMap<R, Rational>,
    pub objective: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome<V: LpKey, R: LpKey> {
    Optimal(LpSolution<V, R>),
    Infeasible,
    Unbounded,
}

impl<V: LpKey, R: LpKey> LpOutcome<V, R> {
    pub fn optimal(self) -> Option<LpSolution<V, R>> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LpOutcome::Optimal(_) => "optimal",
            LpOutcome::Infeasible => "infeasible",
            LpOutcome::Unbounded => "unbounded",
        }
    }
}

impl<V: LpKey, R: LpKey> LpSolution<V, R> {
    pub fn value(&self, var: &V) -> Rational {
        self.x.get(var).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn dual(&self, row: &R) -> Rational {
        self.y.get(row).cloned().unwrap_or_else(Rational::zero)
    }
}

impl<V: LpKey, R: LpKey> LinearProgram<V, R> {
    pub fn new(sense: Sense) -> Self {
        LinearProgram { sense, vars: IndexMap::new(), objective: Vec::new(), rows: IndexMap::new() }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, name: V, domain: Domain) -> Result<usize, LpError> {
        if self.vars.contains_key(&name) {
            return Err(LpError::DuplicateVariable(format!("{name:?}")));
        }
        self.vars.insert(name, domain);
        self.objective.push(Rational::zero());
        Ok(self.vars.len() - 1)
    }

    pub fn set_objective(&mut self, var: &V, coef: Rational) -> Result<(), LpError> {
        let j = self.index_of(var)?;
        self.objective[j] = coef;
        Ok(())
    }

    pub fn add_row<I>(&mut self, id: R, terms: I, relation: Relation, rhs: Rational) -> Result<(), LpError>
    where
        I: IntoIterator<Item = (V, Rational)>,
    {
        if self.rows.contains_key(&id) {
            return Err(LpError::DuplicateRow(format!("{id:?}")));
        }
        let mut merged: IndexMap<usize, Rational> = IndexMap::new();
        for (v, a) in terms {
            let j = self.index_of(&v)?;
            *merged.entry(j).or_insert_with(Rational::zero) += a;
        }
        let coeffs = merged.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        self.rows.insert(id, Row { coeffs, relation, rhs });
        Ok(())
    }

    pub fn index_of(&self, var: &V) -> Result<usize, LpError> {
        self.vars.get_index_of(var).ok_or_else(|| LpError::UnknownVariable(format!("{var:?}")))
    }

    pub fn variables(&self) -> impl Iterator<Item = (&V, Domain)> {
        self.vars.iter().map(|(v, d)| (v, *d))
    }

    pub fn domain(&self, var: &V) -> Option<Domain> {
        self.vars.get(var).copied()
    }

    pub fn objective_coef(&self, var: &V) -> Rational {
        self.vars.get_index_of(var).map(|j| self.objective[j].clone()).unwrap_or_else(Rational::zero)
    }

    pub fn objective_coefs(&self) -> impl Iterator<Item = (&V, &Rational)> {
        self.vars.keys().zip(self.objective.iter())
    }

    pub fn rows(&self) -> impl Iterator<Item = (&R, &Row)> {
        self.rows.iter()
    }

    pub fn row(&self, id: &R) -> Option<&Row> {
        self.rows.get(id)
    }

    pub fn var_at(&self, j: usize) -> &V {
        self.vars.get_index(j).expect("variable index in range").0
    }

    /// Same variables and objective, rows re-keyed through `f`.
    pub fn map_rows<R2: LpKey>(&self, mut f: impl FnMut(&R) -> R2) -> LinearProgram<V, R2> {
        LinearProgram {
            sense: self.sense,
            vars: self.vars.clone(),
            objective: self.objective.clone(),
            rows: self.rows.iter().map(|(k, r)| (f(k), r.clone())).collect(),
        }
    }

    /// Replaces the objective (sense and coefficients).
    pub fn with_objective<I>(&self, sense: Sense, coefs: I) -> Result<Self, LpError>
    where
        I: IntoIterator<Item = (V, Rational)>,
    {
        let mut lp = self.clone();
        lp.sense = sense;
        lp.objective = vec![Rational::zero(); lp.vars.len()];
        for (v, c) in coefs {
            let j = lp.index_of(&v)?;
            lp.objective[j] += c;
        }
        Ok(lp)
    }

    pub fn evaluate(&self, x: &IndexMap<V, Rational>) -> Rational {
        self.vars
            .keys()
            .zip(&self.objective)
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| c * x.get(v).cloned().unwrap_or_else(Rational::zero))
            .sum()
    }

    pub fn row_activity(&self, row: &Row, x: &IndexMap<V, Rational>) -> Rational {
        row.coeffs
            .iter()
            .map(|(j, a)| a * x.get(self.var_at(*j)).cloned().unwrap_or_else(Rational::zero))
            .sum()
    }

    /// Exact primal feasibility of `x` (missing entries read as zero).
    pub fn is_feasible(&self, x: &IndexMap<V, Rational>) -> bool {
        self.primal_violation(x).is_none()
    }

    fn primal_violation(&self, x: &IndexMap<V, Rational>) -> Option<String> {
        for (v, d) in &self.vars {
            if *d == Domain::NonNegative && x.get(v).is_some_and(|q| q.is_negative()) {
                return Some(format!("variable {v:?} is negative"));
            }
        }
        for (id, row) in &self.rows {
            let lhs = self.row_activity(row, x);
            let ok = match row.relation {
                Relation::Le => lhs <= row.rhs,
                Relation::Eq => lhs == row.rhs,
                Relation::Ge => lhs >= row.rhs,
            };
            if !ok {
                return Some(format!("row {id:?} violated: {lhs} vs {}", row.rhs));
            }
        }
        None
    }

    /// Checks primal feasibility, dual feasibility, equal objectives and
    /// complementary slackness of `sol`, all as exact identities.
    pub fn certify(&self, sol: &LpSolution<V, R>) -> Result<(), String> {
        if let Some(msg) = self.primal_violation(&sol.x) {
            return Err(msg);
        }
        let orient = |q: Rational| if self.sense == Sense::Maximize { -q } else { q };
        // Sign conditions on y, read in minimisation orientation.
        for (id, row) in &self.rows {
            let y = orient(sol.dual(id));
            let ok = match row.relation {
                Relation::Ge => !y.is_negative(),
                Relation::Le => !y.is_positive(),
                Relation::Eq => true,
            };
            if !ok {
                return Err(format!("dual of row {id:?} has wrong sign"));
            }
            let slack = self.row_activity(row, &sol.x) - &row.rhs;
            if !slack.is_zero() && !y.is_zero() {
                return Err(format!("row {id:?} is slack but its dual is nonzero"));
            }
        }
        let mut reduced: Vec<Rational> = self.objective.iter().map(|c| orient(c.clone())).collect();
        for (id, row) in &self.rows {
            let y = orient(sol.dual(id));
            if y.is_zero() {
                continue;
            }
            for (j, a) in &row.coeffs {
                reduced[*j] -= &y * a;
            }
        }
        for (j, (v, d)) in self.vars.iter().enumerate() {
            let ok = match d {
                Domain::NonNegative => !reduced[j].is_negative(),
                Domain::Free => reduced[j].is_zero(),
            };
            if !ok {
                return Err(format!("dual constraint of {v:?} violated"));
            }
            if !reduced[j].is_zero() && !sol.value(v).is_zero() {
                return Err(format!("variable {v:?} is positive with nonzero reduced cost"));
            }
        }
        let primal = self.evaluate(&sol.x);
        let dual: Rational = self.rows.iter().map(|(id, row)| sol.dual(id) * &row.rhs).sum();
        if primal != sol.objective || dual != primal {
            return Err(format!("objectives differ: reported {}, primal {primal}, dual {dual}", sol.objective));
        }
        Ok(())
    }

    /// Solves the program exactly. Deterministic: identical programs yield
    /// identical outcomes.
    pub fn solve(&self) -> LpOutcome<V, R> {
        let min_cost = match self.sense {
            Sense::Minimize => self.objective.clone(),
            Sense::Maximize => self.objective.iter().map(|c| -c).collect(),
        };
        let problem = simplex::Problem {
            free: self.vars.values().map(|d| *d == Domain::Free).collect(),
            cost: min_cost,
            rows: self
                .rows
                .values()
                .map(|r| RowData { coeffs: &r.coeffs, relation: r.relation, rhs: &r.rhs })
                .collect(),
        };
        match simplex::solve(&problem) {
            RawOutcome::Infeasible => LpOutcome::Infeasible,
            RawOutcome::Unbounded => LpOutcome::Unbounded,
            RawOutcome::Optimal { x, y } => {
                let x: IndexMap<V, Rational> = self.vars.keys().cloned().zip(x).collect();
                let y: IndexMap<R, Rational> = self
                    .rows
                    .keys()
                    .cloned()
                    .zip(y)
                    .map(|(k, v)| (k, if self.sense == Sense::Maximize { -v } else { v }))
                    .collect();
                let objective = self.evaluate(&x);
                let sol = LpSolution { x, y, objective };
                #[cfg(debug_assertions)]
                if let Err(msg) = self.certify(&sol) {
                    panic!("simplex returned an uncertified optimum: {msg}");
                }
                LpOutcome::Optimal(sol)
            }
        }
    }
}

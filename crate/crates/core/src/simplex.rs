//! Dense two-phase tableau simplex over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest eligible column enters, lowest basic
//! column leaves among ratio ties). Free structural variables are handled
//! natively: a nonbasic free column may enter in either direction (the column is
//! negated to move it downwards) and a basic free variable never leaves.
//! Once the last free variable has entered, the remaining pivots are plain
//! Bland pivots on nonnegative columns, so the method cannot cycle.

use num_traits::{Signed, Zero};

use crate::lp::Relation;
use crate::rational::Rational;

pub(crate) struct RowData<'a> {
    pub coeffs: &'a [(usize, Rational)],
    pub relation: Relation,
    pub rhs: &'a Rational,
}

/// `min cost·x` over `rows`, with `free[j]` marking unrestricted columns.
pub(crate) struct Problem<'a> {
    pub free: Vec<bool>,
    pub cost: Vec<Rational>,
    pub rows: Vec<RowData<'a>>,
}

pub(crate) enum RawOutcome {
    /// Primal values per structural column, dual values per row (shadow prices
    /// of the minimisation: `y ≥ 0` on `≥` rows, `y ≤ 0` on `≤` rows).
    Optimal { x: Vec<Rational>, y: Vec<Rational> },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    /// `rows[i]` has `ncols + 1` entries; the last is the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry is minus the current objective value.
    reduced: Vec<Rational>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    kind: Vec<ColumnKind>,
    free: Vec<bool>,
    negated: Vec<bool>,
    /// Phase-two cost per column (sign follows `negated`).
    cost: Vec<Rational>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.ncols]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let width = self.ncols + 1;
        let p = self.rows[r][j].clone();
        {
            let row = &mut self.rows[r];
            for k in 0..width {
                if !row[k].is_zero() {
                    row[k] = &row[k] / &p;
                }
            }
        }
        let support: Vec<usize> = (0..width).filter(|&k| !self.rows[r][k].is_zero()).collect();
        let pivot_row = self.rows[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let f = self.rows[i][j].clone();
            let row = &mut self.rows[i];
            for &k in &support {
                row[k] -= &f * &pivot_row[k];
            }
        }
        if !self.reduced[j].is_zero() {
            let f = self.reduced[j].clone();
            for &k in &support {
                self.reduced[k] -= &f * &pivot_row[k];
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = j;
        self.is_basic[j] = true;
    }

    fn negate_column(&mut self, j: usize) {
        for row in &mut self.rows {
            if !row[j].is_zero() {
                row[j] = -&row[j];
            }
        }
        self.reduced[j] = -&self.reduced[j];
        self.cost[j] = -&self.cost[j];
        self.negated[j] = !self.negated[j];
    }

    /// Recomputes the reduced-cost row for the column costs `c`.
    fn price(&mut self, c: &[Rational]) {
        let mut reduced: Vec<Rational> = c.to_vec();
        reduced.push(Rational::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            if c[b].is_zero() {
                continue;
            }
            for (k, v) in self.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    reduced[k] -= &c[b] * v;
                }
            }
        }
        self.reduced = reduced;
    }

    fn entering(&mut self, allow_artificial: bool) -> Option<usize> {
        for j in 0..self.ncols {
            if self.is_basic[j] || (!allow_artificial && self.kind[j] == ColumnKind::Artificial) {
                continue;
            }
            let d = &self.reduced[j];
            if d.is_negative() {
                return Some(j);
            }
            if self.free[j] && d.is_positive() {
                self.negate_column(j);
                return Some(j);
            }
        }
        None
    }

    fn leaving(&self, j: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let b = self.basis[r];
            if self.free[b] || !row[j].is_positive() {
                continue;
            }
            let ratio = self.rhs(r) / &row[j];
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio || (ratio == bratio && b < self.basis[br]) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Runs simplex iterations until optimal; `false` means unbounded.
    fn optimize(&mut self, allow_artificial: bool) -> bool {
        while let Some(j) = self.entering(allow_artificial) {
            match self.leaving(j) {
                Some(r) => self.pivot(r, j),
                None => return false,
            }
        }
        true
    }
}

pub(crate) fn solve(problem: &Problem<'_>) -> RawOutcome {
    let n = problem.free.len();
    let m = problem.rows.len();

    // Column layout: structural | slack per inequality row | artificial where needed.
    let mut kind = vec![ColumnKind::Structural; n];
    let mut slack_of = vec![None; m];
    for (i, row) in problem.rows.iter().enumerate() {
        if row.relation != Relation::Eq {
            slack_of[i] = Some(kind.len());
            kind.push(ColumnKind::Slack);
        }
    }
    let flip: Vec<bool> = problem.rows.iter().map(|r| r.rhs.is_negative()).collect();
    let mut initial = vec![0usize; m];
    for (i, row) in problem.rows.iter().enumerate() {
        let slack_sign_positive = match row.relation {
            Relation::Le => !flip[i],
            Relation::Ge => flip[i],
            Relation::Eq => false,
        };
        if slack_sign_positive {
            initial[i] = slack_of[i].expect("inequality row has a slack");
        } else {
            initial[i] = kind.len();
            kind.push(ColumnKind::Artificial);
        }
    }
    let ncols = kind.len();

    let mut rows = vec![vec![Rational::zero(); ncols + 1]; m];
    for (i, row) in problem.rows.iter().enumerate() {
        let sign = if flip[i] { -Rational::from_integer(1.into()) } else { Rational::from_integer(1.into()) };
        let t = &mut rows[i];
        for (j, a) in row.coeffs {
            t[*j] += a * &sign;
        }
        if let Some(s) = slack_of[i] {
            let coef = if row.relation == Relation::Le { sign.clone() } else { -sign.clone() };
            t[s] = coef;
        }
        if kind[initial[i]] == ColumnKind::Artificial {
            t[initial[i]] = Rational::from_integer(1.into());
        }
        t[ncols] = row.rhs * &sign;
    }

    let mut free = problem.free.clone();
    free.resize(ncols, false);
    let mut cost = problem.cost.clone();
    cost.resize(ncols, Rational::zero());
    let mut is_basic = vec![false; ncols];
    for &b in &initial {
        is_basic[b] = true;
    }

    let mut t = Tableau {
        rows,
        reduced: Vec::new(),
        basis: initial.clone(),
        is_basic,
        kind,
        free,
        negated: vec![false; ncols],
        cost,
        ncols,
    };

    // Phase one.
    if t.kind.contains(&ColumnKind::Artificial) {
        let phase_one: Vec<Rational> = t
            .kind
            .iter()
            .map(|k| {
                if *k == ColumnKind::Artificial {
                    Rational::from_integer(1.into())
                } else {
                    Rational::zero()
                }
            })
            .collect();
        t.price(&phase_one);
        let bounded = t.optimize(true);
        debug_assert!(bounded, "phase one is bounded below by zero");
        if !t.reduced[ncols].is_zero() {
            return RawOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if t.kind[t.basis[r]] != ColumnKind::Artificial {
                continue;
            }
            let candidate =
                (0..ncols).find(|&j| t.kind[j] != ColumnKind::Artificial && !t.rows[r][j].is_zero());
            if let Some(j) = candidate {
                t.pivot(r, j);
            }
        }
    }

    // Phase two.
    let cost = t.cost.clone();
    t.price(&cost);
    if !t.optimize(false) {
        return RawOutcome::Unbounded;
    }

    let mut x = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).clone();
        }
    }
    for (j, v) in x.iter_mut().enumerate() {
        if t.negated[j] {
            *v = -&*v;
        }
    }

    // Initial basic columns are unit vectors with zero phase-two cost, so the
    // reduced cost of column `initial[i]` equals `-y_i` for the flipped row.
    let y = (0..m)
        .map(|i| {
            let v = -&t.reduced[initial[i]];
            if flip[i] {
                -v
            } else {
                v
            }
        })
        .collect();

    RawOutcome::Optimal { x, y }
}

#![allow(dead_code)]

use cpmatch::lp::{Domain, LinearProgram, Relation, Sense};
use cpmatch::perturb::PerturbedProblem;
use cpmatch::rational::{int, Rational};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `min cᵀx` over dense rows, every variable nonnegative or free.
#[derive(Clone, Debug)]
pub struct DenseLp {
    pub c: Vec<Rational>,
    pub a: Vec<Vec<Rational>>,
    pub rel: Vec<Relation>,
    pub b: Vec<Rational>,
    pub free: Vec<bool>,
}

impl DenseLp {
    pub fn to_lp(&self) -> LinearProgram<usize, usize> {
        let mut lp = LinearProgram::new(Sense::Minimize);
        for j in 0..self.c.len() {
            lp.add_var(j, if self.free[j] { Domain::Free } else { Domain::NonNegative }).unwrap();
            lp.set_objective(&j, self.c[j].clone()).unwrap();
        }
        for i in 0..self.a.len() {
            let terms = self.a[i].iter().cloned().enumerate();
            lp.add_row(i, terms, self.rel[i], self.b[i].clone()).unwrap();
        }
        lp
    }

    fn feasible(&self, x: &[Rational]) -> bool {
        if (0..x.len()).any(|j| !self.free[j] && x[j].is_negative()) {
            return false;
        }
        self.a.iter().zip(&self.rel).zip(&self.b).all(|((row, rel), b)| {
            let lhs: Rational = row.iter().zip(x).map(|(a, v)| a * v).sum();
            match rel {
                Relation::Le => lhs <= *b,
                Relation::Eq => lhs == *b,
                Relation::Ge => lhs >= *b,
            }
        })
    }

    /// Minimum of `cᵀx` over all basic feasible solutions, or `None` if there
    /// is none. Only meaningful when the region is pointed and bounded.
    pub fn enumerate_vertices(&self) -> Option<Rational> {
        self.vertices().into_iter().map(|(_, v)| v).min()
    }

    /// Every basic feasible solution with its objective value.
    pub fn vertices(&self) -> Vec<(Vec<Rational>, Rational)> {
        let n = self.c.len();
        // Candidate active constraints: every row, and x_j = 0 for bounded j.
        let mut candidates: Vec<(Vec<Rational>, Rational)> =
            self.a.iter().cloned().zip(self.b.iter().cloned()).collect();
        for j in (0..n).filter(|&j| !self.free[j]) {
            let mut e = vec![int(0); n];
            e[j] = int(1);
            candidates.push((e, int(0)));
        }
        let mut out = Vec::new();
        for subset in subsets(candidates.len(), n) {
            let rows: Vec<&(Vec<Rational>, Rational)> = subset.iter().map(|&k| &candidates[k]).collect();
            let Some(x) = solve_square(&rows) else { continue };
            if !self.feasible(&x) {
                continue;
            }
            let value: Rational = self.c.iter().zip(&x).map(|(c, v)| c * v).sum();
            out.push((x, value));
        }
        out
    }
}

fn subsets(len: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, len: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            go(i + 1, len, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, len, k, &mut Vec::new(), &mut out);
    out
}

/// Unique solution of a square system by Gauss-Jordan elimination.
fn solve_square(rows: &[&(Vec<Rational>, Rational)]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    int(rng.gen_range(lo..=hi))
}

/// A random LP with at most 4 variables and 4 rows, boxed so that any
/// feasible instance has a finite optimum at a vertex.
pub fn random_dense_lp(rng: &mut ChaCha8Rng) -> DenseLp {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=4);
    let free: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
    let c = (0..n).map(|_| small(rng, -5, 5)).collect();
    let mut a = Vec::new();
    let mut rel = Vec::new();
    let mut b = Vec::new();
    for _ in 0..m {
        a.push((0..n).map(|_| small(rng, -3, 3)).collect());
        rel.push(match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Eq,
            _ => Relation::Ge,
        });
        b.push(small(rng, -4, 6));
    }
    for j in 0..n {
        let mut e = vec![int(0); n];
        e[j] = int(1);
        a.push(e.clone());
        rel.push(Relation::Le);
        b.push(int(10));
        if free[j] {
            a.push(e);
            rel.push(Relation::Ge);
            b.push(int(-10));
        }
    }
    DenseLp { c, a, rel, b, free }
}

/// A random perturbed pair with `k ≤ 3`, at most 5 columns and 5 structural
/// rows, feasible by construction and boxed so every stage is bounded.
pub fn random_perturbed_problem(rng: &mut ChaCha8Rng) -> PerturbedProblem {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(1..=5);
    let k = rng.gen_range(0..=3);
    let nonnegative: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.75)).collect();
    let point: Vec<Rational> =
        (0..n).map(|j| if nonnegative[j] { small(rng, 0, 3) } else { small(rng, -3, 3) }).collect();
    let mut a: Vec<Vec<Rational>> = Vec::new();
    let mut b = Vec::new();
    for _ in 0..m {
        let row: Vec<Rational> = (0..n).map(|_| small(rng, -2, 2)).collect();
        let at_point: Rational = row.iter().zip(&point).map(|(a, x)| a * x).sum();
        // Some rows pass through the planted point, which makes ties common.
        b.push(at_point - small(rng, 0, 1));
        a.push(row);
    }
    for j in 0..n {
        let mut e = vec![int(0); n];
        e[j] = int(-1);
        a.push(e.clone());
        b.push(int(-6));
        if !nonnegative[j] {
            e[j] = int(1);
            a.push(e);
            b.push(int(-6));
        }
    }
    let costs = (0..=k).map(|_| (0..n).map(|_| small(rng, -2, 3)).collect()).collect();
    PerturbedProblem { a, b, costs, nonnegative }
}

/// `Σ_p ε^p v_p`.
pub fn at_epsilon(coeffs: &[Rational], eps: &Rational) -> Rational {
    let mut power = int(1);
    let mut total = int(0);
    for c in coeffs {
        total += c * &power;
        power *= eps;
    }
    total
}

/// Strong duality and complementary slackness for `min cᵀx`, checked from
/// scratch with the shadow-price signs: `y ≥ 0` on `≥` rows, `y ≤ 0` on `≤`.
pub fn check_duality(lp: &DenseLp, x: &[Rational], y: &[Rational], objective: &Rational) -> Result<(), String> {
    if !lp.feasible(x) {
        return Err("x infeasible".into());
    }
    let primal: Rational = lp.c.iter().zip(x).map(|(c, v)| c * v).sum();
    let dual: Rational = y.iter().zip(&lp.b).map(|(y, b)| y * b).sum();
    if primal != *objective || dual != *objective {
        return Err(format!("objective {objective}, cᵀx {primal}, yᵀb {dual}"));
    }
    for (i, rel) in lp.rel.iter().enumerate() {
        let ok = match rel {
            Relation::Ge => !y[i].is_negative(),
            Relation::Le => !y[i].is_positive(),
            Relation::Eq => true,
        };
        if !ok {
            return Err(format!("y[{i}] = {} has the wrong sign", y[i]));
        }
        let activity: Rational = lp.a[i].iter().zip(x).map(|(a, v)| a * v).sum();
        if !y[i].is_zero() && activity != lp.b[i] {
            return Err(format!("row {i} is slack but y[{i}] ≠ 0"));
        }
    }
    for j in 0..lp.c.len() {
        let reduced: Rational = &lp.c[j] - lp.a.iter().zip(y).map(|(row, yi)| &row[j] * yi).sum::<Rational>();
        if lp.free[j] && !reduced.is_zero() {
            return Err(format!("free column {j} has reduced cost {reduced}"));
        }
        if !lp.free[j] && (reduced.is_negative() || (!reduced.is_zero() && !x[j].is_zero())) {
            return Err(format!("column {j}: reduced cost {reduced}, x = {}", x[j]));
        }
    }
    Ok(())
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn column(p: &PerturbedProblem, j: usize) -> Vec<Rational> {
    p.a.iter().map(|row| row[j].clone()).collect()
}

/// Exact checks of a staged solution, written independently of the library:
/// `x_p` is optimal for every earlier stage program, each stage pair is
/// complementary, and at `ε = 2^{-30}` the pair `(x', y')` is feasible with
/// equal objectives.
pub fn check_staged_solution(p: &PerturbedProblem, sol: &cpmatch::perturb::PerturbedSolution) -> Result<(), String> {
    let (m, n) = (p.a.len(), p.nonnegative.len());
    for (later, sp) in sol.stages.iter().enumerate() {
        for (q, sq) in sol.stages[..later].iter().enumerate() {
            let lp = p.stage_program(q, &sq.tight_rows, &sq.removed_columns);
            let x = sp.x.iter().cloned().enumerate().filter(|(j, _)| !sq.removed_columns.contains(j)).collect();
            if sp.removed_columns.iter().any(|&j| !sp.x[j].is_zero()) || !lp.is_feasible(&x) {
                return Err(format!("x_{later} infeasible for stage {q}"));
            }
            if dot(&p.costs[q], &sp.x) != sq.objective {
                return Err(format!("x_{later} not optimal for stage {q}"));
            }
        }
        for j in (0..n).filter(|j| !sp.removed_columns.contains(j)) {
            let reduced = &p.costs[later][j] - dot(&sp.y, &column(p, j));
            let tight_needed = !p.nonnegative[j] || !sp.x[j].is_zero();
            if (tight_needed && !reduced.is_zero()) || (p.nonnegative[j] && reduced.is_negative()) {
                return Err(format!("stage {later}: column {j} reduced cost {reduced}"));
            }
        }
        for i in 0..m {
            let slack = dot(&p.a[i], &sp.x) - &p.b[i];
            if slack.is_negative() {
                return Err(format!("stage {later}: row {i} violated"));
            }
            let tight = sp.tight_rows.contains(&i);
            if (!tight && sp.y[i].is_negative()) || (!slack.is_zero() && !sp.y[i].is_zero()) {
                return Err(format!("stage {later}: row {i} dual {} with slack {slack}", sp.y[i]));
            }
            if tight && !slack.is_zero() {
                return Err(format!("stage {later}: equality row {i} has slack {slack}"));
            }
        }
    }

    let eps = cpmatch::rational::pow2_neg(30);
    let c_eps: Vec<Rational> =
        (0..n).map(|j| at_epsilon(&p.costs.iter().map(|c| c[j].clone()).collect::<Vec<_>>(), &eps)).collect();
    let y_eps: Vec<Rational> =
        (0..m).map(|i| at_epsilon(&sol.stages.iter().map(|s| s.y[i].clone()).collect::<Vec<_>>(), &eps)).collect();
    if y_eps.iter().any(|v| v.is_negative()) {
        return Err("y'(ε) has a negative entry".into());
    }
    for j in 0..n {
        let load = dot(&y_eps, &column(p, j));
        let ok = if p.nonnegative[j] { load <= c_eps[j] } else { load == c_eps[j] };
        if !ok {
            return Err(format!("y'(ε) violates dual row {j}"));
        }
    }
    for i in 0..m {
        if dot(&p.a[i], &sol.x) < p.b[i] {
            return Err(format!("x' violates row {i}"));
        }
    }
    if (0..n).any(|j| p.nonnegative[j] && sol.x[j].is_negative()) {
        return Err("x' negative".into());
    }
    if dot(&c_eps, &sol.x) != dot(&y_eps, &p.b) {
        return Err("c_εᵀx' ≠ y'(ε)ᵀb".into());
    }
    Ok(())
}

/// The three-stage example with two rows and three columns whose stage duals
/// are printed in full.
pub fn three_stage_example() -> PerturbedProblem {
    let ints = |v: &[i64]| v.iter().map(|&q| int(q)).collect::<Vec<_>>();
    PerturbedProblem {
        a: vec![ints(&[1, 0, 1]), ints(&[0, 1, 2])],
        b: ints(&[1, 1]),
        costs: vec![ints(&[1, 1, 3]), ints(&[4, 2, 0]), ints(&[-2, -1, 1])],
        nonnegative: vec![true, true, false],
    }
}

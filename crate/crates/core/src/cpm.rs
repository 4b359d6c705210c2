//! The cutting-plane matching algorithms.
//!
//! [`solve_unperturbed`] emulates the ε-perturbation with a lexicographically
//! minimal primal and a sequence of staged dual programs.
//! [`solve_perturbed_reference`] perturbs the costs explicitly by `2^{-σ(e)}`.
//! [`solve_naive`] drops the perturbation altogether and reports how it fails.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::{odd_cycles, Edge, EdgeId, EdgeOrdering, EdgeVector, Graph, GraphError, LaminarFamily, OddSet, Vertex};
use crate::lexmin::{lex_min_optimal, LexMinOutcome};
use crate::lp::LpOutcome;
use crate::matching_lp::{
    build_extremal_dual, build_primal, build_stage_dual, extract_pi, stage_cost, tight_sets, DualVector, Member,
    MatchingLpError, StageContext,
};
use crate::perturb::DualSeries;
use crate::rational::{int, pow2_neg, Rational};

pub const ITERATION_CAP_FACTOR: f64 = 32.0;

/// `⌈32·n·log₂(n+1)⌉ + 16`.
pub fn default_iteration_cap(n: usize) -> usize {
    (ITERATION_CAP_FACTOR * n as f64 * ((n + 1) as f64).log2()).ceil() as usize + 16
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationRecord {
    /// 1-based.
    pub index: usize,
    /// The family `x` was computed under.
    pub family: LaminarFamily,
    pub x: EdgeVector,
    /// `D_0, …, D_{|E|}` for the unperturbed method, a single `Π` otherwise.
    /// Empty when the iteration stopped before its dual step.
    pub dual_stages: Vec<DualVector>,
    pub lp_solves: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingResult {
    /// Sorted by edge id.
    pub matching: Vec<EdgeId>,
    /// Sum of the original integer costs.
    pub cost: Rational,
    pub iterations: Vec<IterationRecord>,
    pub total_lp_solves: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invariant {
    HalfIntegrality,
    Laminarity,
    OddSetShape,
    PrimalOptimality,
    StageOptimality,
    DualSign,
    Construction,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::HalfIntegrality => "half-integrality",
            Invariant::Laminarity => "laminarity",
            Invariant::OddSetShape => "odd-set shape",
            Invariant::PrimalOptimality => "primal optimality",
            Invariant::StageOptimality => "stage optimality",
            Invariant::DualSign => "dual sign",
            Invariant::Construction => "program construction",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CpmError {
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("iteration {iteration}: {invariant} violated: {detail}")]
    InvariantViolation { iteration: usize, invariant: Invariant, detail: String },
    #[error("iteration cap {cap} exceeded")]
    IterationCapExceeded { cap: usize },
    #[error("edge ordering covers {got} edges, graph has {expected}")]
    OrderingLength { expected: usize, got: usize },
    #[error("not a perfect matching: {0}")]
    NotAMatching(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CpmOptions {
    /// Defaults to [`default_iteration_cap`].
    pub iteration_cap: Option<usize>,
}

struct Fault {
    invariant: Invariant,
    detail: String,
}

impl Fault {
    fn new(invariant: Invariant, detail: impl ToString) -> Self {
        Fault { invariant, detail: detail.to_string() }
    }

    fn at(self, iteration: usize) -> CpmError {
        CpmError::InvariantViolation { iteration, invariant: self.invariant, detail: self.detail }
    }
}

impl From<MatchingLpError> for Fault {
    fn from(e: MatchingLpError) -> Self {
        Fault::new(Invariant::Construction, e)
    }
}

enum StepError {
    NoPerfectMatching,
    Fault(Fault),
}

impl From<Fault> for StepError {
    fn from(f: Fault) -> Self {
        StepError::Fault(f)
    }
}

impl From<MatchingLpError> for StepError {
    fn from(e: MatchingLpError) -> Self {
        StepError::Fault(e.into())
    }
}

impl StepError {
    fn at(self, iteration: usize) -> CpmError {
        match self {
            StepError::NoPerfectMatching => CpmError::NoPerfectMatching,
            StepError::Fault(f) => f.at(iteration),
        }
    }
}

/// Ordering length, then parity: an odd graph can still carry a fractional
/// perfect matching, so the LPs alone would not reject it.
fn check_input(g: &Graph, sigma: &EdgeOrdering) -> Result<(), CpmError> {
    if sigma.len() != g.edge_count() {
        return Err(CpmError::OrderingLength { expected: g.edge_count(), got: sigma.len() });
    }
    if g.vertex_count() % 2 == 1 {
        return Err(CpmError::NoPerfectMatching);
    }
    Ok(())
}

fn to_edge_vector(g: &Graph, value: impl Fn(EdgeId) -> Rational) -> EdgeVector {
    EdgeVector(g.edge_ids().map(value).collect())
}

/// Lexicographically minimal optimum of `P_F` in `σ` order. Infeasibility of
/// `P_F` proves there is no perfect matching, since every cut row is valid
/// for all of them.
fn lex_min_primal(
    g: &Graph,
    family: &[OddSet],
    sigma: &EdgeOrdering,
) -> Result<(EdgeVector, Rational, usize), StepError> {
    let lp = build_primal(g, &g.costs(), family)?;
    match lex_min_optimal(&lp, sigma.order()) {
        Ok(LexMinOutcome::Optimal(out)) => {
            let x = to_edge_vector(g, |e| out.x[&e].clone());
            Ok((x, out.objective, out.solves))
        }
        Ok(LexMinOutcome::Infeasible) => Err(StepError::NoPerfectMatching),
        Ok(LexMinOutcome::Unbounded) => Err(Fault::new(Invariant::PrimalOptimality, "P_F is unbounded").into()),
        Err(e) => Err(Fault::new(Invariant::PrimalOptimality, e).into()),
    }
}

/// One independent solve of `P_F` confirming that `x` attains its optimum.
fn certify_primal(g: &Graph, family: &[OddSet], x: &EdgeVector, gamma: &Rational) -> Result<usize, StepError> {
    let lp = build_primal(g, &g.costs(), family)?;
    let sol = lp.solve().optimal().ok_or_else(|| Fault::new(Invariant::PrimalOptimality, "P_F lost its optimum"))?;
    let cx: Rational = g.edges().iter().zip(&x.0).map(|(e, v)| int(e.cost) * v).sum();
    if &sol.objective != gamma || cx != *gamma {
        let detail = format!("lexmin value {gamma}, cᵀx = {cx}, re-solved optimum {}", sol.objective);
        return Err(Fault::new(Invariant::PrimalOptimality, detail).into());
    }
    Ok(1)
}

fn half_integral_cycles(g: &Graph, x: &EdgeVector) -> Result<Vec<Vec<Vertex>>, Fault> {
    odd_cycles(g, x).map_err(|e| match e {
        GraphError::HalfIntegralityViolation { .. } => Fault::new(Invariant::HalfIntegrality, e),
        other => Fault::new(Invariant::OddSetShape, other),
    })
}

/// `H' ∪ H''`, where each odd cycle is merged with the maximal sets of `H'`
/// that it meets.
fn next_family(g: &Graph, h_prime: Vec<OddSet>, cycles: &[Vec<Vertex>]) -> Result<LaminarFamily, Fault> {
    let maximal: Vec<&OddSet> = h_prime
        .iter()
        .filter(|s| !h_prime.iter().any(|t| t != *s && s.is_subset(t)))
        .collect();
    let mut sets = h_prime.clone();
    for cycle in cycles {
        let mut members: BTreeSet<Vertex> = cycle.iter().copied().collect();
        for s in maximal.iter().filter(|s| s.intersects(cycle)) {
            members.extend(s.members());
        }
        let c_hat = OddSet::new(members, g.vertex_count())
            .map_err(|e| Fault::new(Invariant::OddSetShape, format!("cycle through {}: {e}", cycle[0])))?;
        sets.push(c_hat);
    }
    LaminarFamily::new(sets).ok_or_else(|| Fault::new(Invariant::Laminarity, "H' ∪ H'' is not laminar"))
}

/// Drops dual entries for sets that left the family; new sets read as zero.
fn carry_over(d: &DualVector, family: &LaminarFamily) -> DualVector {
    d.restricted(|k| match k {
        Member::Vertex(_) => true,
        Member::Set(s) => family.contains(s),
    })
}

fn positive_sets(tight: &[OddSet], pi: &DualVector) -> Result<Vec<OddSet>, Fault> {
    let mut out = Vec::new();
    for s in tight {
        let v = pi.get(&Member::Set(s.clone()));
        if v.is_positive() {
            out.push(s.clone());
        } else if v.is_negative() {
            return Err(Fault::new(Invariant::DualSign, format!("Π({s}) = {v}")));
        }
    }
    Ok(out)
}

/// The support of an integral `x`, checked to cover every vertex exactly once.
pub fn extract_matching(g: &Graph, x: &EdgeVector) -> Result<Vec<EdgeId>, CpmError> {
    if x.len() != g.edge_count() {
        return Err(CpmError::NotAMatching(format!("{} values for {} edges", x.len(), g.edge_count())));
    }
    let mut covered = vec![0usize; g.vertex_count()];
    let mut matching = Vec::new();
    for e in g.edge_ids() {
        let v = x.get(e);
        if v.is_zero() {
            continue;
        }
        if !v.is_one() {
            return Err(CpmError::NotAMatching(format!("x({}) = {v}", g.edge(e))));
        }
        covered[g.edge(e).u] += 1;
        covered[g.edge(e).v] += 1;
        matching.push(e);
    }
    if let Some(w) = covered.iter().position(|&c| c != 1) {
        return Err(CpmError::NotAMatching(format!("vertex {w} is covered {} times", covered[w])));
    }
    Ok(matching)
}

fn matching_cost(g: &Graph, matching: &[EdgeId]) -> Rational {
    matching.iter().map(|&e| int(g.edge(e).cost)).sum()
}

fn finish(g: &Graph, x: &EdgeVector, iterations: Vec<IterationRecord>) -> Result<MatchingResult, CpmError> {
    let matching = extract_matching(g, x)?;
    let cost = matching_cost(g, &matching);
    let total_lp_solves = iterations.iter().map(|r| r.lp_solves).sum();
    Ok(MatchingResult { matching, cost, iterations, total_lp_solves })
}

pub fn solve_unperturbed(g: &Graph, sigma: &EdgeOrdering) -> Result<MatchingResult, CpmError> {
    solve_unperturbed_with(g, sigma, &CpmOptions::default())
}

pub fn solve_unperturbed_with(
    g: &Graph,
    sigma: &EdgeOrdering,
    options: &CpmOptions,
) -> Result<MatchingResult, CpmError> {
    check_input(g, sigma)?;
    let m = g.edge_count();
    let cap = options.iteration_cap.unwrap_or_else(|| default_iteration_cap(g.vertex_count()));
    let mut family = LaminarFamily::empty();
    let mut gamma = vec![DualVector::new(); m + 1];
    let mut iterations = Vec::new();
    loop {
        let index = iterations.len() + 1;
        if index > cap {
            return Err(CpmError::IterationCapExceeded { cap });
        }
        let step = unperturbed_step(g, sigma, &family, &gamma).map_err(|e| e.at(index))?;
        let UnperturbedStep { x, stages, next, solves } = step;
        gamma = stages.iter().map(|d| carry_over(d, &next)).collect();
        iterations.push(IterationRecord { index, family, x: x.clone(), dual_stages: stages, lp_solves: solves });
        family = next;
        if x.is_integral() {
            return finish(g, &x, iterations);
        }
    }
}

struct UnperturbedStep {
    x: EdgeVector,
    stages: Vec<DualVector>,
    next: LaminarFamily,
    solves: usize,
}

fn unperturbed_step(
    g: &Graph,
    sigma: &EdgeOrdering,
    family: &LaminarFamily,
    gamma: &[DualVector],
) -> Result<UnperturbedStep, StepError> {
    let (x, value, mut solves) = lex_min_primal(g, family.sets(), sigma)?;
    solves += certify_primal(g, family.sets(), &x, &value)?;
    let cycles = half_integral_cycles(g, &x)?;
    let tight = tight_sets(g, family.sets(), &x)?;

    let mut ctx = StageContext::default();
    let mut stages = Vec::with_capacity(gamma.len());
    for (i, gamma_i) in gamma.iter().enumerate() {
        let lp = build_stage_dual(g, sigma, i, &x, family.sets(), gamma_i, &ctx)?;
        solves += 1;
        let sol = match lp.solve() {
            LpOutcome::Optimal(sol) => sol,
            other => return Err(Fault::new(Invariant::StageOptimality, format!("D^{i} is {}", other.kind())).into()),
        };
        ctx.absorb(g, &tight, &stage_cost(g, sigma, i)?, gamma_i, &sol);
        stages.push(extract_pi(&sol));
    }

    let series = DualSeries::new(stages.iter().map(|d| d.iter().map(|(k, v)| (k.clone(), v.clone())).collect()).collect())
        .map_err(|e| Fault::new(Invariant::Construction, e))?;
    let mut h_prime = Vec::new();
    for s in &tight {
        if series.is_positive(&Member::Set(s.clone())).map_err(|e| Fault::new(Invariant::DualSign, e))? {
            h_prime.push(s.clone());
        }
    }
    let next = next_family(g, h_prime, &cycles)?;
    Ok(UnperturbedStep { x, stages, next, solves })
}

/// `c(e) + 2^{-σ(e)}`.
pub fn perturbed_costs(g: &Graph, sigma: &EdgeOrdering) -> Vec<Rational> {
    g.edge_ids().map(|e| int(g.edge(e).cost) + pow2_neg(sigma.rank(e))).collect()
}

pub fn solve_perturbed_reference(g: &Graph, sigma: &EdgeOrdering) -> Result<MatchingResult, CpmError> {
    solve_perturbed_reference_with(g, sigma, &CpmOptions::default())
}

pub fn solve_perturbed_reference_with(
    g: &Graph,
    sigma: &EdgeOrdering,
    options: &CpmOptions,
) -> Result<MatchingResult, CpmError> {
    check_input(g, sigma)?;
    let cap = options.iteration_cap.unwrap_or_else(|| default_iteration_cap(g.vertex_count()));
    let costs = perturbed_costs(g, sigma);
    let mut family = LaminarFamily::empty();
    let mut gamma = DualVector::new();
    let mut iterations = Vec::new();
    loop {
        let index = iterations.len() + 1;
        if index > cap {
            return Err(CpmError::IterationCapExceeded { cap });
        }
        let (x, pi, next) = perturbed_step(g, &costs, &family, &gamma).map_err(|e| e.at(index))?;
        gamma = carry_over(&pi, &next);
        iterations.push(IterationRecord { index, family, x: x.clone(), dual_stages: vec![pi], lp_solves: 2 });
        family = next;
        if x.is_integral() {
            return finish(g, &x, iterations);
        }
    }
}

fn perturbed_step(
    g: &Graph,
    costs: &[Rational],
    family: &LaminarFamily,
    gamma: &DualVector,
) -> Result<(EdgeVector, DualVector, LaminarFamily), StepError> {
    let primal = build_primal(g, costs, family.sets())?;
    let x = match primal.solve() {
        LpOutcome::Optimal(sol) => to_edge_vector(g, |e| sol.value(&e)),
        LpOutcome::Infeasible => return Err(StepError::NoPerfectMatching),
        LpOutcome::Unbounded => return Err(Fault::new(Invariant::PrimalOptimality, "P_F is unbounded").into()),
    };
    let cycles = half_integral_cycles(g, &x)?;
    let (pi, h_prime) = extremal_dual(g, costs, family, &x, gamma)?;
    let next = next_family(g, h_prime, &cycles)?;
    Ok((x, pi, next))
}

/// Solves the Γ-extremal dual and returns `Π` with `H' = {S : Π(S) > 0}`.
fn extremal_dual(
    g: &Graph,
    costs: &[Rational],
    family: &LaminarFamily,
    x: &EdgeVector,
    gamma: &DualVector,
) -> Result<(DualVector, Vec<OddSet>), Fault> {
    let lp = build_extremal_dual(g, costs, family.sets(), x, gamma)?;
    let sol = match lp.solve() {
        LpOutcome::Optimal(sol) => sol,
        other => return Err(Fault::new(Invariant::StageOptimality, format!("D* is {}", other.kind()))),
    };
    let pi = extract_pi(&sol);
    let tight = tight_sets(g, family.sets(), x)?;
    let h_prime = positive_sets(&tight, &pi)?;
    Ok((pi, h_prime))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StopReason {
    Integral,
    HalfIntegralityViolation { iteration: usize, edge: Edge, value: Rational },
    /// `(x, F)` at `iteration` equals the pair at the earlier iteration `repeats`.
    CyclingDetected { iteration: usize, repeats: usize },
    MaxIterations,
    NoPerfectMatching,
    InvariantFault { iteration: usize, invariant: Invariant, detail: String },
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::Integral => write!(f, "Integral"),
            StopReason::HalfIntegralityViolation { iteration, edge, value } => {
                write!(f, "HalfIntegralityViolation at iteration {iteration}: x({edge}) = {value}")
            }
            StopReason::CyclingDetected { iteration, repeats } => {
                write!(f, "CyclingDetected at iteration {iteration}, repeating iteration {repeats}")
            }
            StopReason::MaxIterations => write!(f, "MaxIterations"),
            StopReason::NoPerfectMatching => write!(f, "NoPerfectMatching"),
            StopReason::InvariantFault { iteration, invariant, detail } => {
                write!(f, "InvariantFault at iteration {iteration}: {invariant} violated: {detail}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaiveTrace {
    pub iterations: Vec<IterationRecord>,
    pub stop: StopReason,
    /// Present when the run stopped on an integral `x`.
    pub matching: Option<Vec<EdgeId>>,
    pub total_lp_solves: usize,
}

impl NaiveTrace {
    pub fn cost(&self, g: &Graph) -> Option<Rational> {
        self.matching.as_ref().map(|m| matching_cost(g, m))
    }
}

/// Lexmin primal plus the unperturbed Γ-extremal dual, without staged duals.
/// Never fails: every way of stopping is reported in the trace.
pub fn solve_naive(g: &Graph, sigma: &EdgeOrdering, max_iter: usize) -> NaiveTrace {
    let mut trace = NaiveTrace {
        iterations: Vec::new(),
        stop: StopReason::MaxIterations,
        matching: None,
        total_lp_solves: 0,
    };
    match check_input(g, sigma) {
        Ok(()) => {}
        Err(CpmError::NoPerfectMatching) => {
            trace.stop = StopReason::NoPerfectMatching;
            return trace;
        }
        Err(e) => {
            trace.stop =
                StopReason::InvariantFault { iteration: 0, invariant: Invariant::Construction, detail: e.to_string() };
            return trace;
        }
    }
    let costs = g.costs();
    let mut family = LaminarFamily::empty();
    let mut gamma = DualVector::new();
    for index in 1..=max_iter {
        let fault = |f: Fault| StopReason::InvariantFault { iteration: index, invariant: f.invariant, detail: f.detail };
        let (x, mut solves) = match lex_min_primal(g, family.sets(), sigma) {
            Ok((x, _, solves)) => (x, solves),
            Err(StepError::NoPerfectMatching) => {
                trace.stop = StopReason::NoPerfectMatching;
                break;
            }
            Err(StepError::Fault(f)) => {
                trace.stop = fault(f);
                break;
            }
        };
        trace.total_lp_solves += solves;
        let mut record =
            IterationRecord { index, family: family.clone(), x: x.clone(), dual_stages: Vec::new(), lp_solves: solves };

        if x.is_integral() {
            trace.matching = extract_matching(g, &x).ok();
            trace.stop = StopReason::Integral;
            trace.iterations.push(record);
            break;
        }
        if let Some(prev) = trace.iterations.iter().find(|r| r.x == x && r.family == family) {
            trace.stop = StopReason::CyclingDetected { iteration: index, repeats: prev.index };
            trace.iterations.push(record);
            break;
        }
        let cycles = match odd_cycles(g, &x) {
            Ok(c) => c,
            Err(GraphError::HalfIntegralityViolation { edge, value }) => {
                trace.stop = StopReason::HalfIntegralityViolation { iteration: index, edge, value };
                trace.iterations.push(record);
                break;
            }
            Err(e) => {
                trace.stop = fault(Fault::new(Invariant::OddSetShape, e));
                trace.iterations.push(record);
                break;
            }
        };
        let step = extremal_dual(g, &costs, &family, &x, &gamma)
            .and_then(|(pi, h_prime)| next_family(g, h_prime, &cycles).map(|next| (pi, next)));
        solves += 1;
        trace.total_lp_solves += 1;
        record.lp_solves = solves;
        match step {
            Ok((pi, next)) => {
                gamma = carry_over(&pi, &next);
                record.dual_stages.push(pi);
                trace.iterations.push(record);
                family = next;
            }
            Err(f) => {
                trace.stop = fault(f);
                trace.iterations.push(record);
                break;
            }
        }
    }
    trace
}

/// Whether `x` takes only values in `{0, 1/2, 1}`.
pub fn is_half_integral(x: &EdgeVector) -> bool {
    let two = int(2);
    x.0.iter().all(|v| {
        let d = v * &two;
        d.is_integer() && !v.is_negative() && v <= &Rational::one()
    })
}

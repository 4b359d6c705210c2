//! Builders for the matching linear programs: the primal `P_F`, the
//! Γ-extremal dual program, the stage cost vectors `c_i` and the staged dual
//! programs `D^i` with constraints removed according to a [`StageContext`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{is_laminar, EdgeId, EdgeOrdering, EdgeVector, Graph, GraphError, OddSet, Vertex};
use crate::lp::{Domain, LinearProgram, LpError, LpKey, LpSolution, Relation, Sense};
use crate::rational::{int, ratio, Rational};

/// An element of `V ∪ F`: a singleton vertex or a family set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Member {
    Vertex(Vertex),
    Set(OddSet),
}

impl Member {
    pub fn size(&self) -> usize {
        match self {
            Member::Vertex(_) => 1,
            Member::Set(s) => s.len(),
        }
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        match self {
            Member::Vertex(v) => vec![*v],
            Member::Set(s) => s.members().to_vec(),
        }
    }

    /// Whether the edge `u-v` crosses this member.
    pub fn cuts(&self, u: Vertex, v: Vertex) -> bool {
        match self {
            Member::Vertex(w) => (*w == u) != (*w == v),
            Member::Set(s) => s.contains(u) != s.contains(v),
        }
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Member::Vertex(v) => write!(f, "{v}"),
            Member::Set(s) => write!(f, "{s}"),
        }
    }
}

/// A dual assignment `Π` (or a target `Γ`) over `V ∪ F`; absent keys are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DualVector(BTreeMap<Member, Rational>);

impl DualVector {
    pub fn new() -> Self {
        DualVector(BTreeMap::new())
    }

    pub fn get(&self, key: &Member) -> Rational {
        self.0.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, key: Member, value: Rational) {
        self.0.insert(key, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Member, &Rational)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Keeps only the keys accepted by `keep`.
    pub fn restricted(&self, mut keep: impl FnMut(&Member) -> bool) -> Self {
        DualVector(self.0.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect())
    }
}

impl FromIterator<(Member, Rational)> for DualVector {
    fn from_iter<I: IntoIterator<Item = (Member, Rational)>>(iter: I) -> Self {
        DualVector(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PrimalRow {
    Degree(Vertex),
    Cut(OddSet),
}

/// Variables of the dual programs: `r(S)` and `Π(S)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DualVar {
    Deviation(Member),
    Value(Member),
}

/// Rows of the dual programs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DualRow {
    /// `r(S) + Π(S) ≥ Γ(S)`
    Lower(Member),
    /// `−r(S) + Π(S) ≤ Γ(S)`
    Upper(Member),
    /// `Σ_{S : uv ∈ δ(S)} Π(S) (= | ≤) c(uv)`
    Edge(EdgeId),
}

/// Constraints removed from the staged dual programs: `L`, `M`, `N`, `Q`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StageContext {
    /// `L`: members whose `Lower` row is dropped.
    pub lower: BTreeSet<Member>,
    /// `M`: members whose `Upper` row is dropped.
    pub upper: BTreeSet<Member>,
    /// `N`: edges whose inequality row is dropped.
    pub edges: BTreeSet<EdgeId>,
    /// `Q`: sets whose sign constraint `Π(S) ≥ 0` is dropped.
    pub signs: BTreeSet<OddSet>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingLpError {
    #[error("family is not laminar")]
    NotLaminar,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("cost vector has {got} entries, graph has {expected} edges")]
    CostLength { expected: usize, got: usize },
    #[error("x is not feasible for the primal program")]
    InfeasiblePrimalPoint,
    #[error("stage {stage} out of range 0..={max}")]
    StageOutOfRange { stage: usize, max: usize },
    #[error("support edge {0:?} cannot be dropped from the stage program")]
    SupportEdgeDropped(EdgeId),
    #[error("sign constraint dropped for {0}, which is not tight at x")]
    SignDropOutsideTightSets(OddSet),
}

fn check_family(g: &Graph, family: &[OddSet]) -> Result<(), MatchingLpError> {
    if !is_laminar(family) {
        return Err(MatchingLpError::NotLaminar);
    }
    for s in family {
        if let Some(&w) = s.members().iter().find(|&&w| w >= g.vertex_count()) {
            return Err(GraphError::VertexOutOfRange { vertex: w, n: g.vertex_count() }.into());
        }
    }
    Ok(())
}

fn check_costs(g: &Graph, costs: &[Rational]) -> Result<(), MatchingLpError> {
    if costs.len() != g.edge_count() {
        return Err(MatchingLpError::CostLength { expected: g.edge_count(), got: costs.len() });
    }
    Ok(())
}

/// `P_F(G, c)`: degree equalities, one `≥ 1` cut row per family set, `x ≥ 0`.
pub fn build_primal(
    g: &Graph,
    costs: &[Rational],
    family: &[OddSet],
) -> Result<LinearProgram<EdgeId, PrimalRow>, MatchingLpError> {
    check_costs(g, costs)?;
    check_family(g, family)?;
    let mut lp = LinearProgram::new(Sense::Minimize);
    for e in g.edge_ids() {
        lp.add_var(e, Domain::NonNegative)?;
        lp.set_objective(&e, costs[e.0].clone())?;
    }
    for u in 0..g.vertex_count() {
        let terms = g.cut_edges(&[u])?.into_iter().map(|e| (e, int(1)));
        lp.add_row(PrimalRow::Degree(u), terms, Relation::Eq, int(1))?;
    }
    for s in family {
        let terms = g.cut_edges(s.members())?.into_iter().map(|e| (e, int(1)));
        lp.add_row(PrimalRow::Cut(s.clone()), terms, Relation::Ge, int(1))?;
    }
    Ok(lp)
}

/// Exact feasibility of `x` for `P_F`.
pub fn is_primal_feasible(g: &Graph, family: &[OddSet], x: &EdgeVector) -> Result<bool, MatchingLpError> {
    if x.len() != g.edge_count() {
        return Err(GraphError::LengthMismatch { expected: g.edge_count(), got: x.len() }.into());
    }
    if x.0.iter().any(|q| q < &Rational::zero()) {
        return Ok(false);
    }
    for u in 0..g.vertex_count() {
        if !x.sum_over(&g.cut_edges(&[u])?).is_one() {
            return Ok(false);
        }
    }
    for s in family {
        if x.sum_over(&g.cut_edges(s.members())?) < int(1) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `F_x = {S ∈ F : x(δ(S)) = 1}`.
pub fn tight_sets(g: &Graph, family: &[OddSet], x: &EdgeVector) -> Result<Vec<OddSet>, MatchingLpError> {
    let mut out = Vec::new();
    for s in family {
        if x.sum_over(&g.cut_edges(s.members())?).is_one() {
            out.push(s.clone());
        }
    }
    Ok(out)
}

/// `V ∪ F_x` in a fixed order: vertices first, then sets.
pub fn dual_members(g: &Graph, tight: &[OddSet]) -> Vec<Member> {
    (0..g.vertex_count()).map(Member::Vertex).chain(tight.iter().cloned().map(Member::Set)).collect()
}

/// The stage cost `c_i`: the original costs for `i = 0`, otherwise the
/// indicator of the edge with `σ(uv) = i`.
pub fn stage_cost(g: &Graph, sigma: &EdgeOrdering, stage: usize) -> Result<Vec<Rational>, MatchingLpError> {
    let m = g.edge_count();
    if stage > m || sigma.len() != m {
        return Err(MatchingLpError::StageOutOfRange { stage, max: m });
    }
    if stage == 0 {
        return Ok(g.costs());
    }
    let mut c = vec![Rational::zero(); m];
    c[sigma.edge_at(stage).0] = int(1);
    Ok(c)
}

/// The Γ-extremal dual program `D*_F(G, c)` for the primal point `x`.
///
/// Sets of `F \ F_x` get no variables at all, which is the same as fixing
/// their `r` and `Π` to zero.
pub fn build_extremal_dual(
    g: &Graph,
    costs: &[Rational],
    family: &[OddSet],
    x: &EdgeVector,
    gamma: &DualVector,
) -> Result<LinearProgram<DualVar, DualRow>, MatchingLpError> {
    dual_program(g, costs, family, x, gamma, &StageContext::default())
}

/// The staged dual program `D^i_F(G, c, σ, Γ, L, M, N, Q)`.
pub fn build_stage_dual(
    g: &Graph,
    sigma: &EdgeOrdering,
    stage: usize,
    x: &EdgeVector,
    family: &[OddSet],
    gamma_i: &DualVector,
    ctx: &StageContext,
) -> Result<LinearProgram<DualVar, DualRow>, MatchingLpError> {
    let costs = stage_cost(g, sigma, stage)?;
    dual_program(g, &costs, family, x, gamma_i, ctx)
}

fn dual_program(
    g: &Graph,
    costs: &[Rational],
    family: &[OddSet],
    x: &EdgeVector,
    gamma: &DualVector,
    ctx: &StageContext,
) -> Result<LinearProgram<DualVar, DualRow>, MatchingLpError> {
    check_costs(g, costs)?;
    check_family(g, family)?;
    if !is_primal_feasible(g, family, x)? {
        return Err(MatchingLpError::InfeasiblePrimalPoint);
    }
    let tight = tight_sets(g, family, x)?;
    if let Some(s) = ctx.signs.iter().find(|s| !tight.contains(s)) {
        return Err(MatchingLpError::SignDropOutsideTightSets(s.clone()));
    }
    let members = dual_members(g, &tight);

    let mut lp = LinearProgram::new(Sense::Minimize);
    for s in &members {
        // r is left free: r ≥ |Γ − Π| follows from the two bound rows while both
        // are present, and once one is dropped r must be allowed to go negative.
        lp.add_var(DualVar::Deviation(s.clone()), Domain::Free)?;
        lp.set_objective(&DualVar::Deviation(s.clone()), ratio(1, s.size() as i64))?;
    }
    for s in &members {
        let domain = match s {
            Member::Set(set) if !ctx.signs.contains(set) => Domain::NonNegative,
            _ => Domain::Free,
        };
        lp.add_var(DualVar::Value(s.clone()), domain)?;
    }
    for s in &members {
        let target = gamma.get(s);
        if !ctx.lower.contains(s) {
            let terms = [(DualVar::Deviation(s.clone()), int(1)), (DualVar::Value(s.clone()), int(1))];
            lp.add_row(DualRow::Lower(s.clone()), terms, Relation::Ge, target.clone())?;
        }
        if !ctx.upper.contains(s) {
            let terms = [(DualVar::Deviation(s.clone()), int(-1)), (DualVar::Value(s.clone()), int(1))];
            lp.add_row(DualRow::Upper(s.clone()), terms, Relation::Le, target)?;
        }
    }
    for e in g.edge_ids() {
        let in_support = !x.get(e).is_zero();
        if ctx.edges.contains(&e) {
            if in_support {
                return Err(MatchingLpError::SupportEdgeDropped(e));
            }
            continue;
        }
        let edge = g.edge(e);
        let terms: Vec<(DualVar, Rational)> = members
            .iter()
            .filter(|s| s.cuts(edge.u, edge.v))
            .map(|s| (DualVar::Value(s.clone()), int(1)))
            .collect();
        let relation = if in_support { Relation::Eq } else { Relation::Le };
        lp.add_row(DualRow::Edge(e), terms, relation, costs[e.0].clone())?;
    }
    Ok(lp)
}

/// `Π` read from a dual-program solution.
pub fn extract_pi<R: LpKey>(sol: &LpSolution<DualVar, R>) -> DualVector {
    sol.x
        .iter()
        .filter_map(|(k, v)| match k {
            DualVar::Value(s) => Some((s.clone(), v.clone())),
            DualVar::Deviation(_) => None,
        })
        .collect()
}

/// `r` read from a dual-program solution.
pub fn extract_deviation<R: LpKey>(sol: &LpSolution<DualVar, R>) -> DualVector {
    sol.x
        .iter()
        .filter_map(|(k, v)| match k {
            DualVar::Deviation(s) => Some((s.clone(), v.clone())),
            DualVar::Value(_) => None,
        })
        .collect()
}

/// `Σ_{S ∈ members : uv ∈ δ(S)} Π(S)` for every edge.
pub fn edge_loads(g: &Graph, members: &[Member], pi: &DualVector) -> Vec<Rational> {
    g.edges()
        .iter()
        .map(|edge| members.iter().filter(|s| s.cuts(edge.u, edge.v)).map(|s| pi.get(s)).sum())
        .collect()
}

impl StageContext {
    /// Grows `L`, `M`, `N`, `Q` from an optimal `(r, Π)` of the stage program
    /// with costs `costs` and target `gamma`, using exact slack tests.
    pub fn absorb<R: LpKey>(
        &mut self,
        g: &Graph,
        tight: &[OddSet],
        costs: &[Rational],
        gamma: &DualVector,
        sol: &LpSolution<DualVar, R>,
    ) {
        let members = dual_members(g, tight);
        let pi = extract_pi(sol);
        let r = extract_deviation(sol);
        for s in &members {
            let (rs, ps, gs) = (r.get(s), pi.get(s), gamma.get(s));
            if &rs + &ps != gs {
                self.lower.insert(s.clone());
            }
            if &ps - &rs != gs {
                self.upper.insert(s.clone());
            }
            if let Member::Set(set) = s {
                if !ps.is_zero() {
                    self.signs.insert(set.clone());
                }
            }
        }
        for (e, load) in edge_loads(g, &members, &pi).into_iter().enumerate() {
            if load != costs[e] {
                self.edges.insert(EdgeId(e));
            }
        }
    }

    /// Whether every set in `self` also appears in `other`.
    pub fn is_subset_of(&self, other: &StageContext) -> bool {
        self.lower.is_subset(&other.lower)
            && self.upper.is_subset(&other.upper)
            && self.edges.is_subset(&other.edges)
            && self.signs.is_subset(&other.signs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpOutcome;

    fn c4() -> Graph {
        Graph::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap()
    }

    #[test]
    fn primal_with_empty_family_is_the_degree_lp() {
        let g = c4();
        let lp = build_primal(&g, &g.costs(), &[]).unwrap();
        assert_eq!(lp.num_rows(), 4);
        assert_eq!(lp.num_vars(), 4);
        assert!(lp.rows().all(|(_, r)| r.relation == Relation::Eq && r.coeffs.len() == 2));
    }

    #[test]
    fn stage_costs() {
        let g = c4();
        let sigma = EdgeOrdering::from_ranks(vec![3, 1, 4, 2]).unwrap();
        assert_eq!(stage_cost(&g, &sigma, 0).unwrap(), g.costs());
        assert_eq!(stage_cost(&g, &sigma, 1).unwrap(), vec![int(0), int(1), int(0), int(0)]);
        assert_eq!(stage_cost(&g, &sigma, 3).unwrap(), vec![int(1), int(0), int(0), int(0)]);
        assert!(matches!(stage_cost(&g, &sigma, 5), Err(MatchingLpError::StageOutOfRange { .. })));
    }

    #[test]
    fn extremal_dual_at_an_optimal_target_is_zero() {
        let g = c4();
        let x = EdgeVector(vec![int(1), int(0), int(1), int(0)]);
        let gamma: DualVector = (0..4).map(|v| (Member::Vertex(v), ratio(1, 2))).collect();
        let lp = build_extremal_dual(&g, &g.costs(), &[], &x, &gamma).unwrap();
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.objective, int(0));
    }

    #[test]
    fn infeasible_point_is_rejected() {
        let g = c4();
        let x = EdgeVector(vec![int(1), int(1), int(0), int(0)]);
        let err = build_extremal_dual(&g, &g.costs(), &[], &x, &DualVector::new()).unwrap_err();
        assert_eq!(err, MatchingLpError::InfeasiblePrimalPoint);
    }

    #[test]
    fn support_edges_cannot_be_dropped() {
        let g = c4();
        let sigma = EdgeOrdering::identity(4);
        let x = EdgeVector(vec![int(1), int(0), int(1), int(0)]);
        let mut ctx = StageContext::default();
        ctx.edges.insert(EdgeId(0));
        let err = build_stage_dual(&g, &sigma, 1, &x, &[], &DualVector::new(), &ctx).unwrap_err();
        assert_eq!(err, MatchingLpError::SupportEdgeDropped(EdgeId(0)));
        ctx.edges.clear();
        ctx.edges.insert(EdgeId(1));
        let lp = build_stage_dual(&g, &sigma, 1, &x, &[], &DualVector::new(), &ctx).unwrap();
        assert!(lp.row(&DualRow::Edge(EdgeId(1))).is_none());
    }

    #[test]
    fn stage_zero_with_empty_context_matches_extremal_dual() {
        let g = c4();
        let sigma = EdgeOrdering::identity(4);
        let x = EdgeVector(vec![int(1), int(0), int(1), int(0)]);
        let gamma = DualVector::new();
        let a = build_extremal_dual(&g, &g.costs(), &[], &x, &gamma).unwrap();
        let b = build_stage_dual(&g, &sigma, 0, &x, &[], &gamma, &StageContext::default()).unwrap();
        assert_eq!(a.solve(), b.solve());
        assert_eq!(a.num_rows(), b.num_rows());
    }

    #[test]
    fn non_laminar_family_is_rejected() {
        let g = Graph::new(8, (0..7).map(|i| (i, i + 1, 1))).unwrap();
        let fam = [OddSet::new([0, 1, 2], 8).unwrap(), OddSet::new([2, 3, 4], 8).unwrap()];
        assert_eq!(build_primal(&g, &g.costs(), &fam).unwrap_err(), MatchingLpError::NotLaminar);
        assert!(matches!(
            build_primal(&g, &g.costs(), &[]).unwrap().solve(),
            LpOutcome::Optimal(_)
        ));
    }
}

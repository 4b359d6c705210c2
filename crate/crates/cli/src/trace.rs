//! Machine-readable run traces. Every rational is an exact `"p/q"` string.
//! The JSON schema lives in `trace.schema.json` next to this crate's manifest.

use cpmatch::cpm::{CpmError, IterationRecord, MatchingResult, NaiveTrace, StopReason};
use cpmatch::graph::{EdgeId, Graph};
use cpmatch::rational::{int, to_fraction_string};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::format::edge_label;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trace {
    pub algorithm: String,
    pub total_lp_solves: usize,
    pub result: TraceResult,
    /// `None` unless a perfect matching was found.
    pub cost: Option<String>,
    pub iterations: Vec<TraceIteration>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceResult {
    pub status: String,
    pub matching: Option<Vec<String>>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceIteration {
    pub index: usize,
    pub family: Vec<Vec<usize>>,
    pub x: IndexMap<String, String>,
    pub dual_stages: Vec<IndexMap<String, String>>,
    pub lp_solves: usize,
}

fn iteration(g: &Graph, it: &IterationRecord) -> TraceIteration {
    TraceIteration {
        index: it.index,
        family: it.family.sets().iter().map(|s| s.members().to_vec()).collect(),
        x: g.edge_ids().map(|e| (edge_label(g, e), to_fraction_string(it.x.get(e)))).collect(),
        dual_stages: it
            .dual_stages
            .iter()
            .map(|d| d.iter().map(|(k, v)| (k.to_string(), to_fraction_string(v))).collect())
            .collect(),
        lp_solves: it.lp_solves,
    }
}

fn matching_labels(g: &Graph, matching: &[EdgeId]) -> Vec<String> {
    matching.iter().map(|&e| edge_label(g, e)).collect()
}

pub fn error_status(e: &CpmError) -> &'static str {
    match e {
        CpmError::NoPerfectMatching => "NoPerfectMatching",
        CpmError::InvariantViolation { .. } => "InvariantFault",
        CpmError::IterationCapExceeded { .. } => "IterationCapExceeded",
        CpmError::OrderingLength { .. } | CpmError::NotAMatching(_) => "InvalidInput",
    }
}

pub fn stop_status(s: &StopReason) -> &'static str {
    match s {
        StopReason::Integral => "Integral",
        StopReason::HalfIntegralityViolation { .. } => "HalfIntegralityViolation",
        StopReason::CyclingDetected { .. } => "CyclingDetected",
        StopReason::MaxIterations => "MaxIterations",
        StopReason::NoPerfectMatching => "NoPerfectMatching",
        StopReason::InvariantFault { .. } => "InvariantFault",
    }
}

impl Trace {
    pub fn from_result(algorithm: &str, g: &Graph, outcome: &Result<MatchingResult, CpmError>) -> Trace {
        match outcome {
            Ok(r) => Trace {
                algorithm: algorithm.to_string(),
                total_lp_solves: r.total_lp_solves,
                result: TraceResult {
                    status: "Integral".into(),
                    matching: Some(matching_labels(g, &r.matching)),
                    detail: None,
                },
                cost: Some(to_fraction_string(&r.cost)),
                iterations: r.iterations.iter().map(|it| iteration(g, it)).collect(),
            },
            Err(e) => Trace {
                algorithm: algorithm.to_string(),
                total_lp_solves: 0,
                result: TraceResult { status: error_status(e).into(), matching: None, detail: Some(e.to_string()) },
                cost: None,
                iterations: Vec::new(),
            },
        }
    }

    pub fn from_naive(g: &Graph, t: &NaiveTrace) -> Trace {
        let detail = (t.stop != StopReason::Integral).then(|| t.stop.to_string());
        Trace {
            algorithm: "naive".into(),
            total_lp_solves: t.total_lp_solves,
            result: TraceResult {
                status: stop_status(&t.stop).into(),
                matching: t.matching.as_ref().map(|m| matching_labels(g, m)),
                detail,
            },
            cost: t.matching.as_ref().map(|m| {
                to_fraction_string(&m.iter().map(|&e| int(g.edge(e).cost)).sum())
            }),
            iterations: t.iterations.iter().map(|it| iteration(g, it)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace is plain data")
    }
}

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::Serialize;

use crate::exec::Exec;
use crate::ingest::{PointId, ScenarioSpec};
use crate::plan::coverage::{fresh_chain, is_surveilled, Requirements};
use crate::plan::model::{Plan, PlanError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetAudit {
    /// 1-based numbers of the removed UAVs.
    pub removed: Vec<usize>,
    /// Worst delay from an enforced visit to the next surviving visit, per
    /// audited point; `None` when some window has no surviving visit at all.
    pub worst_latency: BTreeMap<PointId, Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub k: usize,
    pub subsets: Vec<SubsetAudit>,
    /// Surveilled points that keep coverage under every removal.
    pub passing: BTreeSet<PointId>,
    /// Points claimed resilient by the plan but failing some removal, with
    /// the first failing subset.
    pub failing_claims: BTreeMap<PointId, Vec<usize>>,
    pub pass: bool,
}

/// Delay from `anchor` to the first surviving visit inside its window.
fn latency(log: &[(usize, usize)], removed: &[usize], anchor: usize, req: &Requirements) -> Option<usize> {
    log.iter()
        .filter(|(s, u)| !removed.contains(u) && req.in_window(anchor, *s))
        .map(|&(s, _)| (s + req.horizon - anchor) % req.horizon)
        .min()
}

/// Removes every subset of exactly `k` UAVs and checks that each enforced
/// visit of each surveilled point still sees a surviving visit within `tr`.
/// A point passes when this holds for all subsets and its visits are chained
/// within `tr`.
pub fn inject_failures(plan: &Plan, spec: &ScenarioSpec, k: usize) -> Result<AuditReport, PlanError> {
    inject_failures_with(plan, spec, k, Exec::default())
}

pub fn inject_failures_with(plan: &Plan, spec: &ScenarioSpec, k: usize, exec: Exec) -> Result<AuditReport, PlanError> {
    let n = plan.n_uavs();
    if k >= n {
        return Err(PlanError::MalformedPlan(format!("cannot remove {k} of {n} UAVs")));
    }
    plan.check_shape(n, spec.n_points)?;
    let req = Requirements { k, ..Requirements::new(spec, &plan.options) };
    let log = plan.visit_log(spec.n_points);
    let audited: Vec<PointId> = spec.points().filter(|p| is_surveilled(&log[p.index()], &req)).collect();

    let subsets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    let subsets: Vec<SubsetAudit> = exec.map_slice(&subsets, |removed| {
        let worst_latency = audited
            .iter()
            .map(|&p| {
                let visits = &log[p.index()];
                let worst = visits
                    .iter()
                    .map(|&(s, _)| s)
                    .dedup()
                    .filter(|&v| !req.waived(v))
                    .map(|v| latency(visits, removed, v, &req))
                    .try_fold(0, |acc, l| l.map(|l| acc.max(l)));
                (p, worst)
            })
            .collect();
        SubsetAudit { removed: removed.iter().map(|u| u + 1).collect(), worst_latency }
    });

    let mut passing = BTreeSet::new();
    for &p in &audited {
        let mut steps: Vec<usize> = log[p.index()].iter().map(|&(s, _)| s).collect();
        steps.dedup();
        let chained = fresh_chain(&steps, req.horizon, req.tr, req.cyclic);
        if chained && subsets.iter().all(|a| a.worst_latency[&p].is_some()) {
            passing.insert(p);
        }
    }
    let mut failing_claims = BTreeMap::new();
    for &p in &plan.claimed_resilient {
        if passing.contains(&p) {
            continue;
        }
        let culprit = subsets
            .iter()
            .find(|a| a.worst_latency.get(&p).is_none_or(|l| l.is_none()))
            .map(|a| a.removed.clone())
            .unwrap_or_default();
        failing_claims.insert(p, culprit);
    }
    let pass = failing_claims.is_empty();
    Ok(AuditReport { k, subsets, passing, failing_claims, pass })
}

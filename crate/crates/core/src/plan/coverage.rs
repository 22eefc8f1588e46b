use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::criticality::CriticalityMap;
use crate::encoder::EncodeOptions;
use crate::ingest::{PointId, ScenarioSpec};
use crate::plan::model::Plan;

/// Timing requirements a visit log is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Requirements {
    pub horizon: usize,
    pub tc: usize,
    pub tr: usize,
    pub k: usize,
    pub cyclic: bool,
    pub waive_tail_windows: bool,
}

impl Requirements {
    pub fn new(spec: &ScenarioSpec, options: &EncodeOptions) -> Self {
        Requirements {
            horizon: spec.horizon,
            tc: spec.tc,
            tr: spec.tr,
            k: spec.k,
            cyclic: options.cyclic,
            waive_tail_windows: options.waive_tail_windows,
        }
    }

    /// Whether the resilience window anchored at `anchor` is exempt.
    pub fn waived(&self, anchor: usize) -> bool {
        !self.cyclic && self.waive_tail_windows && anchor + self.tr > self.horizon
    }

    /// Whether `step` lies in the resilience window anchored at `anchor`.
    pub fn in_window(&self, anchor: usize, step: usize) -> bool {
        if self.cyclic {
            (step + self.horizon - anchor) % self.horizon <= self.tr
        } else {
            step >= anchor && step <= anchor + self.tr
        }
    }

    /// Distinct UAVs visiting within the window anchored at `anchor`.
    pub fn distinct_in_window(&self, log: &[(usize, usize)], anchor: usize) -> usize {
        let uavs: BTreeSet<usize> = log.iter().filter(|(s, _)| self.in_window(anchor, *s)).map(|&(_, u)| u).collect();
        uavs.len()
    }
}

/// Sorted, deduplicated visit steps satisfy the freshness chain: first visit
/// within `threshold`, consecutive gaps at most `threshold`, and (non-cyclic)
/// the last visit late enough that no successor is owed, or (cyclic) the
/// wrap-around gap also within `threshold`.
pub fn fresh_chain(steps: &[usize], horizon: usize, threshold: usize, cyclic: bool) -> bool {
    let (Some(&first), Some(&last)) = (steps.first(), steps.last()) else {
        return false;
    };
    if first > threshold {
        return false;
    }
    if steps.windows(2).any(|w| w[1] - w[0] > threshold) {
        return false;
    }
    if cyclic {
        first + horizon - last <= threshold
    } else {
        last + threshold > horizon
    }
}

fn steps_of(log: &[(usize, usize)]) -> Vec<usize> {
    let mut steps: Vec<usize> = log.iter().map(|&(s, _)| s).collect();
    steps.dedup();
    steps
}

pub fn is_surveilled(log: &[(usize, usize)], req: &Requirements) -> bool {
    fresh_chain(&steps_of(log), req.horizon, req.tc, req.cyclic)
}

/// Surveilled, every visit chained within `tr`, and every visit whose window
/// is enforced sees at least `k + 1` distinct UAVs in it.
pub fn is_resilient(log: &[(usize, usize)], req: &Requirements) -> bool {
    let steps = steps_of(log);
    fresh_chain(&steps, req.horizon, req.tc, req.cyclic)
        && fresh_chain(&steps, req.horizon, req.tr, req.cyclic)
        && steps.iter().all(|&v| req.waived(v) || req.distinct_in_window(log, v) > req.k)
}

/// Integer form of `covered weight >= pct% of total`.
pub fn meets_threshold(weights: &[u64], covered: &BTreeSet<PointId>, pct: u32) -> bool {
    let total: u64 = weights.iter().sum();
    let got: u64 = covered.iter().map(|p| weights[p.index()]).sum();
    100 * got >= pct as u64 * total
}

fn percent(weights: &[u64], covered: &BTreeSet<PointId>) -> f64 {
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let got: u64 = covered.iter().map(|p| weights[p.index()]).sum();
    100.0 * got as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub surveilled_points: BTreeSet<PointId>,
    pub resilient_points: BTreeSet<PointId>,
    pub cs_achieved: f64,
    pub rcs_achieved: f64,
    pub cs_met: bool,
    pub rcs_met: bool,
    /// `(step, uav)` with 1-based UAV numbers.
    pub visit_log: BTreeMap<PointId, Vec<(usize, usize)>>,
}

/// Recomputes the maximal surveilled and resilient sets from the raw visits.
pub fn coverage_scores(plan: &Plan, spec: &ScenarioSpec, crit: &CriticalityMap) -> CoverageReport {
    let req = Requirements::new(spec, &plan.options);
    let log = plan.visit_log(spec.n_points);
    let weights = crit.quantized_point_weights();
    let mut surveilled = BTreeSet::new();
    let mut resilient = BTreeSet::new();
    for p in spec.points() {
        let visits = &log[p.index()];
        if is_surveilled(visits, &req) {
            surveilled.insert(p);
            if is_resilient(visits, &req) {
                resilient.insert(p);
            }
        }
    }
    let visit_log = spec.points().map(|p| (p, log[p.index()].iter().map(|&(s, u)| (s, u + 1)).collect())).collect();
    CoverageReport {
        cs_achieved: percent(&weights, &surveilled),
        rcs_achieved: percent(&weights, &resilient),
        cs_met: meets_threshold(&weights, &surveilled, spec.cs_pct),
        rcs_met: meets_threshold(&weights, &resilient, spec.rcs_pct),
        surveilled_points: surveilled,
        resilient_points: resilient,
        visit_log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(horizon: usize, tc: usize, tr: usize, k: usize) -> Requirements {
        Requirements { horizon, tc, tr, k, cyclic: false, waive_tail_windows: true }
    }

    #[test]
    fn freshness_chain() {
        assert!(fresh_chain(&[3, 6, 9], 10, 3, false));
        assert!(!fresh_chain(&[4, 6, 9], 10, 3, false));
        assert!(!fresh_chain(&[3, 7, 9], 10, 3, false));
        assert!(!fresh_chain(&[3, 6], 10, 3, false));
        assert!(!fresh_chain(&[], 10, 3, false));
        assert!(fresh_chain(&[2, 5, 8], 9, 3, true));
        assert!(!fresh_chain(&[3, 5, 8], 10, 3, true));
    }

    #[test]
    fn long_tail_visits_are_resilient() {
        // (step, uav) with 0-based UAVs; anchored windows at 7, 14 and 38 are
        // enforced, the rest run past the horizon
        let log = [(7, 0), (14, 3), (38, 1), (50, 2), (64, 0), (74, 0)];
        let r = req(91, 25, 45, 2);
        assert!(is_surveilled(&log, &r));
        assert!(is_resilient(&log, &r));
        assert_eq!(r.distinct_in_window(&log, 38), 3);
    }

    #[test]
    fn repeated_uav_breaks_resilience() {
        let log = [(8, 0), (20, 0), (30, 1), (44, 0), (60, 2), (80, 1)];
        let r = req(91, 25, 45, 2);
        assert!(is_surveilled(&log, &r));
        assert_eq!(r.distinct_in_window(&log, 8), 2);
        assert!(!is_resilient(&log, &r));
    }

    #[test]
    fn cyclic_windows_wrap() {
        let r = Requirements { horizon: 10, tc: 5, tr: 4, k: 1, cyclic: true, waive_tail_windows: true };
        assert!(r.in_window(9, 2));
        assert!(!r.in_window(9, 4));
        let log = [(2, 0), (5, 1), (9, 0)];
        assert!(!is_resilient(&log, &r));
        let log = [(1, 1), (2, 0), (5, 1), (9, 0)];
        assert!(is_resilient(&log, &r));
    }

    #[test]
    fn threshold_is_cross_multiplied() {
        let w = [1, 1, 1];
        let one: BTreeSet<PointId> = [PointId(1)].into();
        assert!(meets_threshold(&w, &one, 33));
        assert!(!meets_threshold(&w, &one, 34));
        assert!(meets_threshold(&w, &BTreeSet::new(), 0));
    }
}

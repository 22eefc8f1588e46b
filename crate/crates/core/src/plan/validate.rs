use std::fmt;

use serde::Serialize;

use crate::criticality::CriticalityMap;
use crate::ingest::{PointId, ScenarioSpec, UavSpec};
use crate::plan::coverage::{coverage_scores, is_resilient, is_surveilled, Requirements};
use crate::plan::model::{Event, Plan, PlanError};
use crate::survnet::{fly_cost, SurvNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    Start,
    Adjacency,
    RefuelWindow,
    FuelLedger,
    Reserve,
    CyclicReturn,
    Freshness,
    Resilience,
    Coverage,
    ResilientCoverage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    /// 1-based UAV number.
    pub uav: Option<usize>,
    pub point: Option<PointId>,
    pub step: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rule)?;
        if let Some(u) = self.uav {
            write!(f, " uav={u}")?;
        }
        if let Some(p) = self.point {
            write!(f, " point={p}")?;
        }
        if let Some(s) = self.step {
            write!(f, " step={s}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

struct Checker<'a> {
    net: &'a SurvNet,
    plan: &'a Plan,
    scale: i64,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn flag(&mut self, rule: Rule, uav: usize, step: usize, point: Option<PointId>, detail: String) {
        self.out.push(Violation { rule, uav: Some(uav + 1), point, step: Some(step), detail });
    }

    /// Compares the recorded fuel at a visit step with the simulated value and
    /// checks the base reserve. Returns the value to carry forward.
    fn settle_fuel(&mut self, u: usize, uav: &UavSpec, s: usize, p: PointId, expected: Option<i64>) -> Option<i64> {
        let recorded = self.plan.fuel_at(u, s);
        let fuel = match (recorded, expected) {
            (Some(r), Some(e)) if r != e => {
                self.flag(Rule::FuelLedger, u, s, Some(p), format!("recorded fuel {r}, expected {e}"));
                Some(e)
            }
            (None, e) => {
                self.flag(Rule::FuelLedger, u, s, Some(p), "no fuel recorded at visit".into());
                e
            }
            (r, None) => r,
            (_, e) => e,
        };
        if let Some(f) = fuel {
            let reserve = uav.ffuel as i64 * self.scale * self.net.tb(p) as i64;
            if f < reserve {
                self.flag(Rule::Reserve, u, s, Some(p), format!("fuel {f} below base reserve {reserve}"));
            }
        }
        fuel
    }

    /// Checks the round trip departing from a visit of `from` at step `d`.
    /// Returns the step and point of the next visit and the reset fuel, or
    /// `None` after flagging a broken window.
    fn trip(&mut self, u: usize, uav: &UavSpec, d: usize, from: PointId) -> Option<(usize, PointId, i64)> {
        let horizon = self.plan.horizon;
        let out_len = self.net.tb(from);
        if out_len == 0 {
            self.flag(Rule::RefuelWindow, u, d + 1, Some(from), "left the base point for a refuel trip".into());
            return None;
        }
        let at_base = d + out_len;
        if at_base >= horizon {
            self.flag(Rule::RefuelWindow, u, d + 1, Some(from), "refuel trip does not complete in the horizon".into());
            return None;
        }
        for s in d + 1..at_base {
            if self.plan.event(u, s) != Event::DepartToBase(from) {
                self.flag(Rule::RefuelWindow, u, s, Some(from), format!("expected depart from {from}"));
                return None;
            }
        }
        if self.plan.event(u, at_base) != Event::AtBase {
            self.flag(Rule::RefuelWindow, u, at_base, Some(from), "expected arrival at base".into());
            return None;
        }
        let to = match self.plan.event(u, at_base + 1) {
            Event::ReturnFromBase(p) | Event::Visit(p) => p,
            other => {
                self.flag(Rule::RefuelWindow, u, at_base + 1, None, format!("unexpected {other:?} after refuel"));
                return None;
            }
        };
        let back_len = self.net.tb(to);
        let arrive = at_base + back_len;
        if back_len == 0 || arrive > horizon {
            self.flag(Rule::RefuelWindow, u, at_base + 1, Some(to), "return leg does not reach a point in time".into());
            return None;
        }
        for s in at_base + 1..arrive {
            if self.plan.event(u, s) != Event::ReturnFromBase(to) {
                self.flag(Rule::RefuelWindow, u, s, Some(to), format!("expected return to {to}"));
                return None;
            }
        }
        if self.plan.event(u, arrive) != Event::Visit(to) {
            self.flag(Rule::RefuelWindow, u, arrive, Some(to), format!("expected visit of {to} after return"));
            return None;
        }
        let reset = (uav.fuel_cap as i64 - uav.ffuel as i64 * back_len as i64) * self.scale;
        Some((arrive, to, reset))
    }

    fn uav(&mut self, u: usize, uav: &UavSpec) {
        let horizon = self.plan.horizon;
        let mut s = 1;
        let mut fuel = Some(uav.init_fuel as i64 * self.scale);
        let mut here = match self.plan.event(u, 1) {
            Event::Visit(p) => {
                if p != uav.init_point {
                    self.flag(Rule::Start, u, 1, Some(p), format!("starts at {p}, not {}", uav.init_point));
                }
                p
            }
            other => {
                self.flag(Rule::Start, u, 1, None, format!("step 1 is {other:?}"));
                match self.resync(u, 1) {
                    Some((next, p)) => {
                        s = next;
                        fuel = None;
                        p
                    }
                    None => return,
                }
            }
        };
        fuel = self.settle_fuel(u, uav, s, here, fuel);
        while s < horizon {
            match self.plan.event(u, s + 1) {
                Event::Visit(q) => {
                    let expected = if q == here {
                        fuel.map(|f| f - uav.hfuel as i64 * self.scale)
                    } else if let Some(ratio) = self.net.cost_ratio(here, q) {
                        fuel.map(|f| f - fly_cost(uav.ffuel, ratio, self.scale as u64))
                    } else {
                        self.flag(Rule::Adjacency, u, s + 1, Some(q), format!("{here} and {q} are not adjacent"));
                        None
                    };
                    s += 1;
                    here = q;
                    fuel = self.settle_fuel(u, uav, s, here, expected);
                }
                _ => match self.trip(u, uav, s, here) {
                    Some((arrive, to, reset)) => {
                        s = arrive;
                        here = to;
                        fuel = self.settle_fuel(u, uav, s, here, Some(reset));
                    }
                    None => match self.resync(u, s + 1) {
                        Some((next, p)) => {
                            s = next;
                            here = p;
                            fuel = self.settle_fuel(u, uav, s, here, None);
                        }
                        None => break,
                    },
                },
            }
        }
        if self.plan.options.cyclic {
            let last = self.plan.event(u, horizon);
            if last != Event::Visit(uav.init_point) {
                self.flag(Rule::CyclicReturn, u, horizon, Some(uav.init_point), format!("ends with {last:?}"));
            }
            let want = uav.init_fuel as i64 * self.scale;
            if let Some(f) = self.plan.fuel_at(u, horizon) {
                if f < want {
                    self.flag(Rule::CyclicReturn, u, horizon, None, format!("ends with fuel {f} < {want}"));
                }
            }
        }
    }

    /// Next visit at or after `from`.
    fn resync(&self, u: usize, from: usize) -> Option<(usize, PointId)> {
        (from..=self.plan.horizon).find_map(|s| self.plan.event(u, s).visited().map(|p| (s, p)))
    }
}

/// Re-checks a plan against every scenario rule without reference to the
/// constraint model. An empty result means the plan is valid.
pub fn validate(
    plan: &Plan,
    spec: &ScenarioSpec,
    net: &SurvNet,
    crit: &CriticalityMap,
) -> Result<Vec<Violation>, PlanError> {
    plan.check_shape(spec.uavs.len(), spec.n_points)?;
    if plan.horizon != spec.horizon {
        return Err(PlanError::MalformedPlan(format!(
            "plan horizon {} differs from scenario horizon {}",
            plan.horizon, spec.horizon
        )));
    }
    let mut c = Checker { net, plan, scale: plan.options.fixed_point_scale.max(1) as i64, out: Vec::new() };
    for (u, uav) in spec.uavs.iter().enumerate() {
        c.uav(u, uav);
    }
    let mut out = c.out;

    let req = Requirements::new(spec, &plan.options);
    let log = plan.visit_log(spec.n_points);
    for &p in &plan.claimed_surveilled {
        if !is_surveilled(&log[p.index()], &req) {
            out.push(Violation {
                rule: Rule::Freshness,
                uav: None,
                point: Some(p),
                step: None,
                detail: format!("claimed surveilled but a gap exceeds {}", spec.tc),
            });
        }
    }
    for &p in &plan.claimed_resilient {
        if !is_resilient(&log[p.index()], &req) {
            out.push(Violation {
                rule: Rule::Resilience,
                uav: None,
                point: Some(p),
                step: None,
                detail: format!("claimed resilient but lacks {} distinct UAVs per window", spec.k + 1),
            });
        }
    }
    let report = coverage_scores(plan, spec, crit);
    if !report.cs_met {
        out.push(Violation {
            rule: Rule::Coverage,
            uav: None,
            point: None,
            step: None,
            detail: format!("coverage {:.2}% below {}%", report.cs_achieved, spec.cs_pct),
        });
    }
    if !report.rcs_met {
        out.push(Violation {
            rule: Rule::ResilientCoverage,
            uav: None,
            point: None,
            step: None,
            detail: format!("resilient coverage {:.2}% below {}%", report.rcs_achieved, spec.rcs_pct),
        });
    }
    Ok(out)
}

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::criticality::CriticalityMap;
use crate::encoder::{Assignment, ConstraintModel, Family, Value, VarKey};
use crate::ingest::{PointId, ScenarioSpec};
use crate::plan::{coverage_scores, validate, Event, Plan, PlanError, Requirements, Violation};
use crate::survnet::SurvNet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("inconsistent model: {0}")]
    InconsistentModel(String),
    #[error("decoded plan fails validation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Rejected(Vec<Violation>),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Maps solver output names onto the model's variables. Unknown names are
/// ignored; absent booleans read as false.
pub fn assignment_from_values(model: &ConstraintModel, values: &BTreeMap<String, Value>) -> Assignment {
    let mut a = Assignment::new(model.n_vars());
    for (name, value) in values {
        if let Some(v) = VarKey::parse(name).and_then(|k| model.lookup(k)) {
            a.set(v, *value);
        }
    }
    a
}

fn inconsistent(msg: String) -> DecodeError {
    DecodeError::InconsistentModel(msg)
}

/// Rebuilds per-UAV timelines from the visit and refuel variables, then
/// checks the result with the plan validator.
pub fn decode(
    model: &ConstraintModel,
    a: &Assignment,
    spec: &ScenarioSpec,
    net: &SurvNet,
    crit: &CriticalityMap,
) -> Result<Plan, DecodeError> {
    let horizon = spec.horizon;
    let truth = |f: Family, u: usize, p: PointId, s: usize| model.var(f, u, p, s).is_some_and(|v| a.bool(v));
    let nowhere = PointId(0);
    let mut timelines = Vec::with_capacity(spec.uavs.len());
    let mut fuel = Vec::with_capacity(spec.uavs.len());
    for u in 0..spec.uavs.len() {
        let mut at: Vec<Option<PointId>> = Vec::with_capacity(horizon);
        for s in 1..=horizon {
            let here: Vec<PointId> = net.points().filter(|&p| truth(Family::Visit, u, p, s)).collect();
            match here.as_slice() {
                [] => {
                    if !truth(Family::Away, u, nowhere, s) {
                        return Err(inconsistent(format!("UAV {} is nowhere at step {s}", u + 1)));
                    }
                    at.push(None);
                }
                [p] => at.push(Some(*p)),
                _ => return Err(inconsistent(format!("UAV {} is at {} points at step {s}", u + 1, here.len()))),
            }
        }
        let mut events = Vec::with_capacity(horizon);
        let mut fuel_row = vec![None; horizon];
        let mut s = 1;
        while s <= horizon {
            if let Some(p) = at[s - 1] {
                events.push(Event::Visit(p));
                let v = model.var(Family::Fuel, u, nowhere, s).expect("fuel is declared");
                fuel_row[s - 1] = Some(a.int(v));
                s += 1;
                continue;
            }
            let from = (s > 1)
                .then(|| at[s - 2])
                .flatten()
                .ok_or_else(|| inconsistent(format!("UAV {} away at step {s} with no departure", u + 1)))?;
            let end = (s..=horizon).find(|&w| at[w - 1].is_some()).ok_or_else(|| {
                inconsistent(format!("UAV {} never returns after leaving {from} at step {}", u + 1, s - 1))
            })?;
            let to = at[end - 1].unwrap();
            let refuel = s - 1 + net.tb(from);
            let consistent = truth(Family::ToRefuel, u, from, s - 1)
                && truth(Family::Refuel, u, nowhere, refuel)
                && truth(Family::RefuelTo, u, to, end)
                && refuel + net.tb(to) == end;
            if !consistent {
                return Err(inconsistent(format!(
                    "UAV {} trip {from}@{} -> {to}@{end} lacks matching refuel events",
                    u + 1,
                    s - 1
                )));
            }
            for w in s..end {
                events.push(match w.cmp(&refuel) {
                    std::cmp::Ordering::Less => Event::DepartToBase(from),
                    std::cmp::Ordering::Equal => Event::AtBase,
                    std::cmp::Ordering::Greater => Event::ReturnFromBase(to),
                });
            }
            s = end;
        }
        timelines.push(events);
        fuel.push(fuel_row);
    }
    let claimed = |f: Family| -> BTreeSet<PointId> { net.points().filter(|&p| truth(f, 0, p, 0)).collect() };
    let plan = Plan {
        horizon,
        options: model.options,
        timelines,
        fuel,
        claimed_surveilled: claimed(Family::Surveilled),
        claimed_resilient: claimed(Family::ResSurveilled),
    };
    let violations = validate(&plan, spec, net, crit)?;
    if !violations.is_empty() {
        return Err(DecodeError::Rejected(violations));
    }
    Ok(plan)
}

/// Total assignment induced by a plan in the model's variable space, with
/// coverage flags set to the maximal recomputed sets. A valid plan satisfies
/// every assertion of the model built from the same scenario.
pub fn assignment_for_plan(
    model: &ConstraintModel,
    plan: &Plan,
    spec: &ScenarioSpec,
    net: &SurvNet,
    crit: &CriticalityMap,
) -> Assignment {
    let mut a = Assignment::new(model.n_vars());
    for (i, key) in model.vars().iter().enumerate() {
        let v = crate::encoder::VarId(i as u32);
        a.set(v, if key.family.is_int() { Value::Int(0) } else { Value::Bool(false) });
    }
    let nowhere = PointId(0);
    let mut set = |f: Family, u: usize, p: PointId, s: usize, value: Value| {
        if let Some(v) = model.var(f, u, p, s) {
            a.set(v, value);
        }
    };
    let yes = Value::Bool(true);
    for u in 0..plan.n_uavs() {
        for s in 1..=plan.horizon {
            match plan.event(u, s) {
                Event::Visit(p) => {
                    set(Family::Visit, u, p, s, yes);
                    set(Family::Fuel, u, nowhere, s, Value::Int(plan.fuel_at(u, s).unwrap_or(0)));
                    if s > 1 {
                        match plan.event(u, s - 1) {
                            Event::Visit(q) if q == p => set(Family::Hover, u, p, s, yes),
                            Event::Visit(_) => set(Family::Fly, u, p, s, yes),
                            _ => set(Family::RefuelTo, u, p, s, yes),
                        }
                    }
                    if s < plan.horizon && plan.event(u, s + 1).visited().is_none() {
                        set(Family::ToRefuel, u, p, s, yes);
                    }
                }
                Event::AtBase => {
                    set(Family::Refuel, u, nowhere, s, yes);
                    set(Family::Away, u, nowhere, s, yes);
                }
                Event::DepartToBase(_) | Event::ReturnFromBase(_) => set(Family::Away, u, nowhere, s, yes),
            }
        }
    }
    let report = coverage_scores(plan, spec, crit);
    let req = Requirements::new(spec, &plan.options);
    let log = plan.visit_log(spec.n_points);
    for p in net.points() {
        let visits = &log[p.index()];
        let resilient = report.resilient_points.contains(&p);
        for &(s, _) in visits {
            set(Family::Visited, 0, p, s, yes);
            if resilient {
                set(Family::ResVisited, 0, p, s, yes);
            }
        }
        for s in 1..=plan.horizon {
            if req.waived(s) {
                continue;
            }
            for &(w, u) in visits {
                if req.in_window(s, w) {
                    set(Family::VisitDuring, u, p, s, yes);
                }
            }
        }
        if report.surveilled_points.contains(&p) {
            set(Family::Surveilled, 0, p, 0, yes);
        }
        if resilient {
            set(Family::ResSurveilled, 0, p, 0, yes);
        }
    }
    a
}

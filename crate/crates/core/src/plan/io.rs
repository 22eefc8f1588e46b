use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::encoder::EncodeOptions;
use crate::ingest::PointId;
use crate::plan::model::{Event, Plan, PlanError};

pub const PLAN_HEADER: &str = "uav,step,event,point,fuel";

fn event_fields(e: Event) -> (&'static str, String) {
    match e {
        Event::Visit(p) => ("visit", p.to_string()),
        Event::DepartToBase(p) => ("depart", p.to_string()),
        Event::AtBase => ("at_base", String::new()),
        Event::ReturnFromBase(p) => ("return", p.to_string()),
    }
}

fn join(points: &BTreeSet<PointId>) -> String {
    points.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

/// One row per UAV and step, then a `[summary]` block of `key,value` pairs.
pub fn write_plan(plan: &Plan) -> String {
    let mut out = String::new();
    out.push_str(PLAN_HEADER);
    out.push('\n');
    for u in 0..plan.n_uavs() {
        for s in 1..=plan.horizon {
            let (name, point) = event_fields(plan.event(u, s));
            let fuel = plan.fuel_at(u, s).map(|f| f.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{s},{name},{point},{fuel}", u + 1);
        }
    }
    out.push_str("\n[summary]\n");
    let _ = writeln!(out, "horizon,{}", plan.horizon);
    let _ = writeln!(out, "uavs,{}", plan.n_uavs());
    let _ = writeln!(out, "cyclic,{}", plan.options.cyclic);
    let _ = writeln!(out, "waive_tail_windows,{}", plan.options.waive_tail_windows);
    let _ = writeln!(out, "fixed_point_scale,{}", plan.options.fixed_point_scale);
    let _ = writeln!(out, "surveilled,{}", join(&plan.claimed_surveilled));
    let _ = writeln!(out, "resilient,{}", join(&plan.claimed_resilient));
    out
}

fn bad(line: usize, msg: impl std::fmt::Display) -> PlanError {
    PlanError::MalformedPlan(format!("line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T, PlanError> {
    field.trim().parse().map_err(|_| bad(line, format!("bad {what} '{field}'")))
}

fn points(line: usize, field: &str) -> Result<BTreeSet<PointId>, PlanError> {
    field.split_whitespace().map(|t| num(line, t, "point").map(PointId)).collect()
}

pub fn read_plan(text: &str) -> Result<Plan, PlanError> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut in_summary = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || t == PLAN_HEADER {
            continue;
        }
        if t == "[summary]" {
            in_summary = true;
            continue;
        }
        let fields: Vec<&str> = t.split(',').collect();
        if in_summary {
            if fields.len() != 2 {
                return Err(bad(line, "summary entries are key,value"));
            }
            summary.push((line, fields[0].trim(), fields[1].trim()));
        } else {
            if fields.len() != 5 {
                return Err(bad(line, format!("expected 5 fields, found {}", fields.len())));
            }
            rows.push((line, fields));
        }
    }

    let mut horizon = None;
    let mut n_uavs = None;
    let mut options = EncodeOptions::default();
    let mut surveilled = BTreeSet::new();
    let mut resilient = BTreeSet::new();
    for (line, key, value) in summary {
        match key {
            "horizon" => horizon = Some(num::<usize>(line, value, "horizon")?),
            "uavs" => n_uavs = Some(num::<usize>(line, value, "UAV count")?),
            "cyclic" => options.cyclic = num(line, value, "flag")?,
            "waive_tail_windows" => options.waive_tail_windows = num(line, value, "flag")?,
            "fixed_point_scale" => options.fixed_point_scale = num(line, value, "scale")?,
            "surveilled" => surveilled = points(line, value)?,
            "resilient" => resilient = points(line, value)?,
            other => return Err(bad(line, format!("unknown summary key '{other}'"))),
        }
    }
    let horizon = horizon.ok_or_else(|| PlanError::MalformedPlan("summary lacks horizon".into()))?;
    let n_uavs = n_uavs.ok_or_else(|| PlanError::MalformedPlan("summary lacks uavs".into()))?;

    let mut timelines: Vec<Vec<Option<Event>>> = vec![vec![None; horizon]; n_uavs];
    let mut fuel = vec![vec![None; horizon]; n_uavs];
    for (line, f) in rows {
        let u: usize = num(line, f[0], "UAV")?;
        let s: usize = num(line, f[1], "step")?;
        if u == 0 || u > n_uavs || s == 0 || s > horizon {
            return Err(bad(line, format!("UAV {u} step {s} out of range")));
        }
        let point = || num(line, f[3], "point").map(PointId);
        let event = match f[2].trim() {
            "visit" => Event::Visit(point()?),
            "depart" => Event::DepartToBase(point()?),
            "at_base" => Event::AtBase,
            "return" => Event::ReturnFromBase(point()?),
            other => return Err(bad(line, format!("unknown event '{other}'"))),
        };
        let slot = &mut timelines[u - 1][s - 1];
        if slot.is_some() {
            return Err(bad(line, format!("UAV {u} step {s} listed twice")));
        }
        *slot = Some(event);
        if !f[4].trim().is_empty() {
            fuel[u - 1][s - 1] = Some(num(line, f[4], "fuel")?);
        }
    }
    let timelines = timelines
        .into_iter()
        .enumerate()
        .map(|(u, t)| {
            t.into_iter()
                .enumerate()
                .map(|(s, e)| {
                    e.ok_or_else(|| PlanError::MalformedPlan(format!("UAV {} has no event at step {}", u + 1, s + 1)))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(Plan { horizon, options, timelines, fuel, claimed_surveilled: surveilled, claimed_resilient: resilient })
}

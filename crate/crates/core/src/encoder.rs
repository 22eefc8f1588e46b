//! Constraint model for a fixed surveillance horizon.
//!
//! Every UAV occupies exactly one point per step or is away on a refuel round
//! trip. Visits follow hover, fly or return-from-base transitions with a fuel
//! ledger in fixed-point units. Coverage flags are one-directional: a flag may
//! only be true when its window conditions hold, and the weighted coverage
//! lower bounds push the flags up.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::criticality::CriticalityMap;
use crate::ingest::{PointId, ScenarioSpec};
use crate::survnet::{fly_cost, SurvNet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("UAV {uav} starts with {init_fuel} fuel but needs {needed} to reach the base")]
    StrandedUav { uav: usize, init_fuel: u64, needed: u64 },
    #[error("fleet is empty")]
    EmptyFleet,
    #[error("horizon {horizon} is shorter than the freshness threshold {tc}")]
    HorizonTooShort { horizon: usize, tc: usize },
    #[error("criticality map covers {got} points, network has {expected}")]
    WeightMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EncodeOptions {
    /// Plan must end where it started with at least the initial fuel; windows wrap.
    pub cyclic: bool,
    /// Fuel units are multiplied by this factor so climb ratios stay integral.
    pub fixed_point_scale: u64,
    /// Resilience windows running past the horizon are not enforced.
    pub waive_tail_windows: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { cyclic: false, fixed_point_scale: 100, waive_tail_windows: true }
    }
}

impl EncodeOptions {
    pub fn for_spec(spec: &ScenarioSpec) -> Self {
        EncodeOptions { cyclic: spec.cyclic, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    Visit,
    Hover,
    Fly,
    ToRefuel,
    Refuel,
    RefuelTo,
    Away,
    Visited,
    Surveilled,
    VisitDuring,
    ResVisited,
    ResSurveilled,
    Fuel,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::Visit,
        Family::Hover,
        Family::Fly,
        Family::ToRefuel,
        Family::Refuel,
        Family::RefuelTo,
        Family::Away,
        Family::Visited,
        Family::Surveilled,
        Family::VisitDuring,
        Family::ResVisited,
        Family::ResSurveilled,
        Family::Fuel,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            Family::Visit => "visit",
            Family::Hover => "hover",
            Family::Fly => "fly",
            Family::ToRefuel => "torefuel",
            Family::Refuel => "refuel",
            Family::RefuelTo => "refuelto",
            Family::Away => "away",
            Family::Visited => "visited",
            Family::Surveilled => "surveilled",
            Family::VisitDuring => "visitduring",
            Family::ResVisited => "resvisited",
            Family::ResSurveilled => "ressurveilled",
            Family::Fuel => "fuel",
        }
    }

    pub fn is_int(self) -> bool {
        self == Family::Fuel
    }

    fn has_uav(self) -> bool {
        !matches!(self, Family::Visited | Family::Surveilled | Family::ResVisited | Family::ResSurveilled)
    }

    fn has_point(self) -> bool {
        !matches!(self, Family::Refuel | Family::Away | Family::Fuel)
    }

    fn has_step(self) -> bool {
        !matches!(self, Family::Surveilled | Family::ResSurveilled)
    }
}

/// Index of a variable: 1-based UAV, point id and step; 0 where the family
/// has no such index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarKey {
    pub family: Family,
    pub uav: u32,
    pub point: u32,
    pub step: u32,
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.prefix())?;
        if self.family.has_uav() {
            write!(f, "_{}", self.uav)?;
        }
        if self.family.has_point() {
            write!(f, "_{}", self.point)?;
        }
        if self.family.has_step() {
            write!(f, "_{}", self.step)?;
        }
        Ok(())
    }
}

impl VarKey {
    /// Inverse of the `Display` naming scheme.
    pub fn parse(name: &str) -> Option<VarKey> {
        let mut parts = name.split('_');
        let prefix = parts.next()?;
        let family = *Family::ALL.iter().find(|f| f.prefix() == prefix)?;
        let nums: Vec<u32> = parts.map(|p| p.parse().ok()).collect::<Option<_>>()?;
        let expected = family.has_uav() as usize + family.has_point() as usize + family.has_step() as usize;
        if nums.len() != expected {
            return None;
        }
        let mut it = nums.into_iter();
        let uav = if family.has_uav() { it.next()? } else { 0 };
        let point = if family.has_point() { it.next()? } else { 0 };
        let step = if family.has_step() { it.next()? } else { 0 };
        Some(VarKey { family, uav, point, step })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cmp {
    Eq,
    Ge,
    Le,
}

impl Cmp {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Le => lhs <= rhs,
        }
    }

    pub fn smt(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expr {
    Const(bool),
    /// A boolean variable, negated when the flag is false.
    Lit(VarId, bool),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    /// `sum(coef * int_var) cmp rhs`
    Linear {
        terms: Vec<(i64, VarId)>,
        cmp: Cmp,
        rhs: i64,
    },
    /// `sum(weight * [bool_var]) cmp rhs`
    Pseudo {
        terms: Vec<(i64, VarId)>,
        cmp: Cmp,
        rhs: i64,
    },
}

impl Expr {
    pub fn var(v: VarId) -> Expr {
        Expr::Lit(v, true)
    }

    pub fn not(v: VarId) -> Expr {
        Expr::Lit(v, false)
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    /// `Or` that collapses the empty and singleton cases.
    pub fn any(mut items: Vec<Expr>) -> Expr {
        match items.len() {
            0 => Expr::Const(false),
            1 => items.pop().unwrap(),
            _ => Expr::Or(items),
        }
    }

    pub fn all(mut items: Vec<Expr>) -> Expr {
        match items.len() {
            0 => Expr::Const(true),
            1 => items.pop().unwrap(),
            _ => Expr::And(items),
        }
    }

    /// Evaluates under a total assignment.
    pub fn eval(&self, a: &Assignment) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Lit(v, pos) => a.bool(*v) == *pos,
            Expr::And(xs) => xs.iter().all(|x| x.eval(a)),
            Expr::Or(xs) => xs.iter().any(|x| x.eval(a)),
            Expr::Implies(p, q) => !p.eval(a) || q.eval(a),
            Expr::Linear { terms, cmp, rhs } => {
                let lhs: i64 = terms.iter().map(|(c, v)| c * a.int(*v)).sum();
                cmp.holds(lhs, *rhs)
            }
            Expr::Pseudo { terms, cmp, rhs } => {
                let lhs: i64 = terms.iter().filter(|(_, v)| a.bool(*v)).map(|(w, _)| w).sum();
                cmp.holds(lhs, *rhs)
            }
        }
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Expr::Const(_) => {}
            Expr::Lit(v, _) => f(*v),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.for_each_var(f)),
            Expr::Implies(p, q) => {
                p.for_each_var(f);
                q.for_each_var(f);
            }
            Expr::Linear { terms, .. } | Expr::Pseudo { terms, .. } => terms.iter().for_each(|(_, v)| f(*v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Group {
    Init,
    Frame,
    Dynamics,
    Refuel,
    Freshness,
    Resilience,
    Coverage,
    Cyclic,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::Init => "initial placement and fuel",
            Group::Frame => "one place per UAV and step",
            Group::Dynamics => "hover, fly and fuel reserve",
            Group::Refuel => "refuel round trips",
            Group::Freshness => "continuous surveillance",
            Group::Resilience => "resilient surveillance",
            Group::Coverage => "criticality coverage",
            Group::Cyclic => "plan repetition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub group: Group,
    pub expr: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

/// Values for the variables of one model, indexed by `VarId`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    values: Vec<Option<Value>>,
}

impl Assignment {
    pub fn new(n_vars: usize) -> Self {
        Assignment { values: vec![None; n_vars] }
    }

    pub fn set(&mut self, v: VarId, value: Value) {
        self.values[v.0 as usize] = Some(value);
    }

    pub fn get(&self, v: VarId) -> Option<Value> {
        self.values.get(v.0 as usize).copied().flatten()
    }

    /// Unset booleans read as false (solvers may omit don't-care values).
    pub fn bool(&self, v: VarId) -> bool {
        matches!(self.get(v), Some(Value::Bool(true)))
    }

    pub fn int(&self, v: VarId) -> i64 {
        match self.get(v) {
            Some(Value::Int(i)) => i,
            _ => 0,
        }
    }
}

/// Scenario quantities the model was built from, kept for decoding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelShape {
    pub n_uavs: usize,
    pub n_points: usize,
    pub horizon: usize,
    pub tc: usize,
    pub tr: usize,
    pub k: usize,
    pub weights: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintModel {
    vars: Vec<VarKey>,
    #[serde(skip)]
    index: HashMap<VarKey, VarId>,
    pub assertions: Vec<Assertion>,
    pub options: EncodeOptions,
    pub shape: ModelShape,
}

impl ConstraintModel {
    pub fn vars(&self) -> &[VarKey] {
        &self.vars
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn key(&self, v: VarId) -> VarKey {
        self.vars[v.0 as usize]
    }

    pub fn lookup(&self, key: VarKey) -> Option<VarId> {
        self.index.get(&key).copied()
    }

    /// Variable of `family` for 0-based `uav`, point and 1-based `step`.
    pub fn var(&self, family: Family, uav: usize, point: PointId, step: usize) -> Option<VarId> {
        self.lookup(key_of(family, uav, point, step))
    }

    pub fn count(&self, family: Family) -> usize {
        self.vars.iter().filter(|k| k.family == family).count()
    }

    /// Indices of assertions violated by `a`.
    pub fn violated(&self, a: &Assignment) -> Vec<usize> {
        self.assertions.iter().enumerate().filter(|(_, x)| !x.expr.eval(a)).map(|(i, _)| i).collect()
    }

    pub fn group_sizes(&self) -> Vec<(Group, usize)> {
        let mut out: Vec<(Group, usize)> = Vec::new();
        for a in &self.assertions {
            match out.iter_mut().find(|(g, _)| *g == a.group) {
                Some((_, n)) => *n += 1,
                None => out.push((a.group, 1)),
            }
        }
        out
    }
}

fn key_of(family: Family, uav: usize, point: PointId, step: usize) -> VarKey {
    VarKey {
        family,
        uav: if family.has_uav() { uav as u32 + 1 } else { 0 },
        point: if family.has_point() { point.0 } else { 0 },
        step: if family.has_step() { step as u32 } else { 0 },
    }
}

struct Builder {
    vars: Vec<VarKey>,
    index: HashMap<VarKey, VarId>,
    assertions: Vec<Assertion>,
}

impl Builder {
    fn declare(&mut self, family: Family, uav: usize, point: PointId, step: usize) {
        let key = key_of(family, uav, point, step);
        let id = VarId(self.vars.len() as u32);
        self.vars.push(key);
        self.index.insert(key, id);
    }

    fn v(&self, family: Family, uav: usize, point: PointId, step: usize) -> VarId {
        self.index[&key_of(family, uav, point, step)]
    }

    fn assert(&mut self, group: Group, expr: Expr) {
        self.assertions.push(Assertion { group, expr });
    }
}

/// Window of steps `s'` with `lo <= s' <= hi` (1-based, possibly past the
/// horizon), wrapped onto `1..=S` in cyclic mode and clipped otherwise.
fn window(lo: usize, hi: usize, horizon: usize, cyclic: bool) -> Vec<usize> {
    let mut out: Vec<usize> =
        if cyclic { (lo..=hi).map(|s| (s - 1) % horizon + 1).collect() } else { (lo..=hi.min(horizon)).collect() };
    out.sort_unstable();
    out.dedup();
    out
}

pub fn encode(
    spec: &ScenarioSpec,
    net: &SurvNet,
    crit: &CriticalityMap,
    options: EncodeOptions,
) -> Result<ConstraintModel, EncodeError> {
    let n_uavs = spec.uavs.len();
    let horizon = spec.horizon;
    let s_max = horizon;
    if n_uavs == 0 {
        return Err(EncodeError::EmptyFleet);
    }
    if horizon < spec.tc {
        return Err(EncodeError::HorizonTooShort { horizon, tc: spec.tc });
    }
    if crit.point_weight.len() != net.n_points() {
        return Err(EncodeError::WeightMismatch { expected: net.n_points(), got: crit.point_weight.len() });
    }
    for (u, uav) in spec.uavs.iter().enumerate() {
        let needed = uav.ffuel * net.tb(uav.init_point) as u64;
        if uav.init_fuel < needed {
            return Err(EncodeError::StrandedUav { uav: u + 1, init_fuel: uav.init_fuel, needed });
        }
    }

    let scale = options.fixed_point_scale.max(1) as i64;
    let cyclic = options.cyclic;
    let points: Vec<PointId> = net.points().collect();
    let tb = |p: PointId| net.tb(p);
    let steps = 1..=s_max;

    let mut b = Builder { vars: Vec::new(), index: HashMap::new(), assertions: Vec::new() };
    let nowhere = PointId(0);
    for u in 0..n_uavs {
        for &family in
            &[Family::Visit, Family::Hover, Family::Fly, Family::ToRefuel, Family::RefuelTo, Family::VisitDuring]
        {
            for &p in &points {
                for s in steps.clone() {
                    b.declare(family, u, p, s);
                }
            }
        }
        for s in steps.clone() {
            b.declare(Family::Refuel, u, nowhere, s);
            b.declare(Family::Away, u, nowhere, s);
        }
    }
    for &p in &points {
        for s in steps.clone() {
            b.declare(Family::Visited, 0, p, s);
            b.declare(Family::ResVisited, 0, p, s);
        }
        b.declare(Family::Surveilled, 0, p, 0);
        b.declare(Family::ResSurveilled, 0, p, 0);
    }
    for u in 0..n_uavs {
        for s in steps.clone() {
            b.declare(Family::Fuel, u, nowhere, s);
        }
    }

    for (u, uav) in spec.uavs.iter().enumerate() {
        let fuel = |b: &Builder, s: usize| b.v(Family::Fuel, u, nowhere, s);
        let visit = |b: &Builder, p: PointId, s: usize| b.v(Family::Visit, u, p, s);
        let away = |b: &Builder, s: usize| b.v(Family::Away, u, nowhere, s);
        let ffuel = uav.ffuel as i64 * scale;
        let reset = |p: PointId| uav.fuel_cap as i64 * scale - ffuel * tb(p) as i64;

        // initialization
        let init = visit(&b, uav.init_point, 1);
        b.assert(Group::Init, Expr::var(init));
        let f1 = fuel(&b, 1);
        b.assert(Group::Init, Expr::Linear { terms: vec![(1, f1)], cmp: Cmp::Eq, rhs: uav.init_fuel as i64 * scale });

        for s in steps.clone() {
            // exactly one point or away
            let mut terms: Vec<(i64, VarId)> = points.iter().map(|&p| (1, visit(&b, p, s))).collect();
            terms.push((1, away(&b, s)));
            b.assert(Group::Frame, Expr::Pseudo { terms, cmp: Cmp::Eq, rhs: 1 });

            if s == 1 {
                let a1 = away(&b, 1);
                b.assert(Group::Frame, Expr::not(a1));
            } else {
                let mut starts = vec![Expr::var(away(&b, s - 1))];
                starts.extend(points.iter().map(|&p| Expr::var(b.v(Family::ToRefuel, u, p, s - 1))));
                let a = away(&b, s);
                b.assert(Group::Frame, Expr::implies(Expr::var(a), Expr::any(starts)));
            }

            for &p in &points {
                let vis = visit(&b, p, s);
                let hover = b.v(Family::Hover, u, p, s);
                let fly = b.v(Family::Fly, u, p, s);
                let back = b.v(Family::RefuelTo, u, p, s);
                let reserve = Expr::Linear { terms: vec![(1, fuel(&b, s))], cmp: Cmp::Ge, rhs: ffuel * tb(p) as i64 };
                b.assert(Group::Dynamics, Expr::implies(Expr::var(vis), reserve));
                if s == 1 {
                    b.assert(Group::Dynamics, Expr::not(hover));
                    b.assert(Group::Dynamics, Expr::not(fly));
                    continue;
                }
                b.assert(
                    Group::Dynamics,
                    Expr::implies(Expr::var(vis), Expr::Or(vec![Expr::var(hover), Expr::var(fly), Expr::var(back)])),
                );
                let (fs, fp) = (fuel(&b, s), fuel(&b, s - 1));
                let step_cost = |cost: i64| Expr::Linear { terms: vec![(1, fs), (-1, fp)], cmp: Cmp::Eq, rhs: -cost };
                b.assert(
                    Group::Dynamics,
                    Expr::implies(
                        Expr::var(hover),
                        Expr::And(vec![Expr::var(visit(&b, p, s - 1)), step_cost(uav.hfuel as i64 * scale)]),
                    ),
                );
                let arrivals: Vec<Expr> = net
                    .neighbors(p)
                    .iter()
                    .map(|&q| {
                        let ratio = net.cost_ratio(q, p).expect("neighbors have ratios");
                        Expr::And(vec![
                            Expr::var(visit(&b, q, s - 1)),
                            step_cost(fly_cost(uav.ffuel, ratio, scale as u64)),
                        ])
                    })
                    .collect();
                b.assert(Group::Dynamics, Expr::implies(Expr::var(fly), Expr::any(arrivals)));
            }
        }

        // refuel round trips: depart from p at d, at base at d + tb(p),
        // resume at p' at r + tb(p'); base-point endpoints are not allowed
        for s in steps.clone() {
            for &p in &points {
                let depart = b.v(Family::ToRefuel, u, p, s);
                let t = tb(p);
                if t == 0 || s + t > s_max - 1 {
                    b.assert(Group::Refuel, Expr::not(depart));
                } else {
                    let mut body = vec![Expr::var(visit(&b, p, s)), Expr::var(b.v(Family::Refuel, u, nowhere, s + t))];
                    body.extend((s + 1..=s + t).map(|w| Expr::var(away(&b, w))));
                    b.assert(Group::Refuel, Expr::implies(Expr::var(depart), Expr::And(body)));
                }

                let resume = b.v(Family::RefuelTo, u, p, s);
                if t == 0 || s < t + 2 {
                    b.assert(Group::Refuel, Expr::not(resume));
                } else {
                    let r = s - t;
                    let mut body = vec![Expr::var(visit(&b, p, s)), Expr::var(b.v(Family::Refuel, u, nowhere, r))];
                    body.extend((r..s).map(|w| Expr::var(away(&b, w))));
                    body.push(Expr::Linear { terms: vec![(1, fuel(&b, s))], cmp: Cmp::Eq, rhs: reset(p) });
                    b.assert(Group::Refuel, Expr::implies(Expr::var(resume), Expr::And(body)));
                }
            }
            let refuel = b.v(Family::Refuel, u, nowhere, s);
            if s < 2 || s > s_max - 1 {
                b.assert(Group::Refuel, Expr::not(refuel));
                continue;
            }
            let origins: Vec<Expr> = points
                .iter()
                .filter(|&&p| tb(p) >= 1 && s > tb(p))
                .map(|&p| Expr::var(b.v(Family::ToRefuel, u, p, s - tb(p))))
                .collect();
            b.assert(Group::Refuel, Expr::implies(Expr::var(refuel), Expr::any(origins)));
            let returns: Vec<Expr> = points
                .iter()
                .filter(|&&p| tb(p) >= 1 && s + tb(p) <= s_max)
                .map(|&p| Expr::var(b.v(Family::RefuelTo, u, p, s + tb(p))))
                .collect();
            b.assert(Group::Refuel, Expr::implies(Expr::var(refuel), Expr::any(returns)));
        }

        if cyclic {
            let last = visit(&b, uav.init_point, s_max);
            b.assert(Group::Cyclic, Expr::var(last));
            let fs = fuel(&b, s_max);
            b.assert(
                Group::Cyclic,
                Expr::Linear { terms: vec![(1, fs)], cmp: Cmp::Ge, rhs: uav.init_fuel as i64 * scale },
            );
        }
    }

    let tc = spec.tc;
    let tr = spec.tr;
    let need = spec.k as i64 + 1;
    for &p in &points {
        let surveilled = b.v(Family::Surveilled, 0, p, 0);
        let resilient = b.v(Family::ResSurveilled, 0, p, 0);
        let visited = |b: &Builder, s: usize| b.v(Family::Visited, 0, p, s);
        let res_visited = |b: &Builder, s: usize| b.v(Family::ResVisited, 0, p, s);

        for s in steps.clone() {
            let by_any: Vec<Expr> = (0..n_uavs).map(|u| Expr::var(b.v(Family::Visit, u, p, s))).collect();
            let vs = visited(&b, s);
            b.assert(Group::Freshness, Expr::implies(Expr::var(vs), Expr::any(by_any)));
        }
        let initial: Vec<Expr> = (1..=tc).map(|s| Expr::var(visited(&b, s))).collect();
        b.assert(Group::Freshness, Expr::implies(Expr::var(surveilled), Expr::any(initial)));
        let fresh_steps = if cyclic { 1..=s_max } else { 1..=s_max - tc };
        for s in fresh_steps {
            let next: Vec<Expr> =
                window(s + 1, s + tc, s_max, cyclic).into_iter().map(|w| Expr::var(visited(&b, w))).collect();
            b.assert(
                Group::Freshness,
                Expr::implies(Expr::var(surveilled), Expr::implies(Expr::var(visited(&b, s)), Expr::any(next))),
            );
        }

        for s in steps.clone() {
            let waived = !cyclic && options.waive_tail_windows && s + tr > s_max;
            for u in 0..n_uavs {
                let during = b.v(Family::VisitDuring, u, p, s);
                if waived {
                    b.assert(Group::Resilience, Expr::not(during));
                } else {
                    let seen: Vec<Expr> = window(s, s + tr, s_max, cyclic)
                        .into_iter()
                        .map(|w| Expr::var(b.v(Family::Visit, u, p, w)))
                        .collect();
                    b.assert(Group::Resilience, Expr::implies(Expr::var(during), Expr::any(seen)));
                }
            }
            let rv = res_visited(&b, s);
            let mut body = vec![Expr::var(visited(&b, s))];
            if !waived {
                let terms = (0..n_uavs).map(|u| (1, b.v(Family::VisitDuring, u, p, s))).collect();
                body.push(Expr::Pseudo { terms, cmp: Cmp::Ge, rhs: need });
            }
            b.assert(Group::Resilience, Expr::implies(Expr::var(rv), Expr::all(body)));

            // every actual visit of a resilient point must itself be resilient
            let by_any: Vec<Expr> = (0..n_uavs).map(|u| Expr::var(b.v(Family::Visit, u, p, s))).collect();
            b.assert(
                Group::Resilience,
                Expr::implies(Expr::var(resilient), Expr::implies(Expr::any(by_any), Expr::var(rv))),
            );
        }
        b.assert(Group::Resilience, Expr::implies(Expr::var(resilient), Expr::var(surveilled)));
        let initial: Vec<Expr> = (1..=tr.min(s_max)).map(|s| Expr::var(res_visited(&b, s))).collect();
        b.assert(Group::Resilience, Expr::implies(Expr::var(resilient), Expr::any(initial)));
        let chain_steps = if cyclic { 1..=s_max } else { 1..=s_max.saturating_sub(tr) };
        for s in chain_steps {
            let next: Vec<Expr> =
                window(s + 1, s + tr, s_max, cyclic).into_iter().map(|w| Expr::var(res_visited(&b, w))).collect();
            b.assert(
                Group::Resilience,
                Expr::implies(Expr::var(resilient), Expr::implies(Expr::var(res_visited(&b, s)), Expr::any(next))),
            );
        }
    }

    let weights = crit.quantized_point_weights();
    let total: i64 = weights.iter().map(|&w| w as i64).sum();
    for (family, pct) in [(Family::Surveilled, spec.cs_pct), (Family::ResSurveilled, spec.rcs_pct)] {
        let terms = points
            .iter()
            .filter(|p| weights[p.index()] > 0)
            .map(|&p| (100 * weights[p.index()] as i64, b.v(family, 0, p, 0)))
            .collect();
        b.assert(Group::Coverage, Expr::Pseudo { terms, cmp: Cmp::Ge, rhs: pct as i64 * total });
    }

    Ok(ConstraintModel {
        vars: b.vars,
        index: b.index,
        assertions: b.assertions,
        options,
        shape: ModelShape { n_uavs, n_points: net.n_points(), horizon, tc, tr, k: spec.k, weights },
    })
}

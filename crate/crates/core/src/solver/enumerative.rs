use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use thiserror::Error;

use crate::criticality::CriticalityMap;
use crate::encoder::EncodeOptions;
use crate::exec::Exec;
use crate::ingest::{PointId, ScenarioSpec};
use crate::plan::{coverage_scores, Event, Plan, Requirements};
use crate::solver::{SolveOutcome, SolveStats, SolveStatus};
use crate::survnet::{fly_cost, SurvNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimits {
    pub max_points: usize,
    pub max_uavs: usize,
    pub max_horizon: usize,
    /// Search nodes before giving up with `Unknown`.
    pub max_nodes: u64,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits { max_points: 10, max_uavs: 2, max_horizon: 12, max_nodes: 200_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("instance exceeds enumeration limits: {0}")]
    LimitExceeded(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerativeResult {
    pub outcome: SolveOutcome,
    pub witness: Option<Plan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Pos {
    At { point: PointId, fuel: i64 },
    Trip { from: PointId, to: PointId, refuel: usize, arrive: usize, reset: i64 },
}

struct Search<'a> {
    spec: &'a ScenarioSpec,
    net: &'a SurvNet,
    req: Requirements,
    options: EncodeOptions,
    scale: i64,
    weights: Vec<u64>,
    total_weight: u64,
    /// Hop distance to each UAV's start, for cyclic pruning.
    home_dist: Vec<Vec<usize>>,
    crit: &'a CriticalityMap,
    nodes: &'a AtomicU64,
    limit: u64,
    stop: &'a AtomicBool,
    exhausted: &'a AtomicBool,
}

struct Branch {
    pos: Vec<Pos>,
    events: Vec<Vec<Event>>,
    fuel: Vec<Vec<Option<i64>>>,
    log: Vec<Vec<(usize, usize)>>,
    failed: HashSet<Vec<i64>>,
}

fn hop_distances(net: &SurvNet, from: PointId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; net.n_points()];
    let mut queue = VecDeque::from([from]);
    dist[from.index()] = 0;
    while let Some(p) = queue.pop_front() {
        for &q in net.neighbors(p) {
            if dist[q.index()] == usize::MAX {
                dist[q.index()] = dist[p.index()] + 1;
                queue.push_back(q);
            }
        }
    }
    dist
}

impl Search<'_> {
    fn reserve(&self, u: usize, p: PointId) -> i64 {
        self.spec.uavs[u].ffuel as i64 * self.scale * self.net.tb(p) as i64
    }

    fn event_of(pos: Pos, step: usize) -> Event {
        match pos {
            Pos::At { point, .. } => Event::Visit(point),
            Pos::Trip { from, to, refuel, .. } => {
                if step < refuel {
                    Event::DepartToBase(from)
                } else if step == refuel {
                    Event::AtBase
                } else {
                    Event::ReturnFromBase(to)
                }
            }
        }
    }

    /// States UAV `u` can occupy at step `s + 1` from `pos` at step `s`.
    fn moves(&self, u: usize, pos: Pos, s: usize) -> Vec<Pos> {
        let horizon = self.req.horizon;
        let uav = &self.spec.uavs[u];
        match pos {
            Pos::Trip { to, arrive, reset, .. } if arrive == s + 1 => vec![Pos::At { point: to, fuel: reset }],
            Pos::Trip { .. } => vec![pos],
            Pos::At { point, fuel } => {
                let mut out = Vec::new();
                let hover = fuel - uav.hfuel as i64 * self.scale;
                if hover >= self.reserve(u, point) {
                    out.push(Pos::At { point, fuel: hover });
                }
                for &q in self.net.neighbors(point) {
                    let ratio = self.net.cost_ratio(point, q).expect("neighbors have ratios");
                    let f = fuel - fly_cost(uav.ffuel, ratio, self.scale as u64);
                    if f >= self.reserve(u, q) {
                        out.push(Pos::At { point: q, fuel: f });
                    }
                }
                let out_len = self.net.tb(point);
                if out_len >= 1 && s + out_len < horizon {
                    let refuel = s + out_len;
                    for to in self.net.points() {
                        let back = self.net.tb(to);
                        let reset = (uav.fuel_cap as i64 - uav.ffuel as i64 * back as i64) * self.scale;
                        if back >= 1 && refuel + back <= horizon && reset >= self.reserve(u, to) {
                            out.push(Pos::Trip { from: point, to, refuel, arrive: refuel + back, reset });
                        }
                    }
                }
                out
            }
        }
    }

    fn can_get_home(&self, u: usize, pos: Pos, s: usize) -> bool {
        let horizon = self.req.horizon;
        match pos {
            Pos::At { point, .. } => self.home_dist[u][point.index()] <= horizon - s,
            Pos::Trip { to, arrive, .. } => self.home_dist[u][to.index()] <= horizon - arrive,
        }
    }

    /// Whether the freshness chain with `threshold` is already broken after
    /// placing steps `1..=s`.
    fn chain_dead(&self, steps: &[usize], s: usize, threshold: usize) -> bool {
        match steps.first() {
            None => s >= threshold,
            Some(&first) => {
                if first > threshold || steps.windows(2).any(|w| w[1] - w[0] > threshold) {
                    return true;
                }
                s >= steps[steps.len() - 1] + threshold
            }
        }
    }

    fn windows_dead(&self, log: &[(usize, usize)], steps: &[usize], s: usize) -> bool {
        let r = &self.req;
        steps.iter().any(|&v| {
            if r.waived(v) {
                return false;
            }
            let end = if r.cyclic { v + r.tr } else { (v + r.tr).min(r.horizon) };
            end <= s && r.distinct_in_window(log, v) <= r.k
        })
    }

    /// Upper bounds on achievable coverage clear both thresholds.
    fn promising(&self, log: &[Vec<(usize, usize)>], s: usize) -> bool {
        let mut surv = 0;
        let mut res = 0;
        for (i, visits) in log.iter().enumerate() {
            let w = self.weights[i];
            if w == 0 {
                continue;
            }
            let mut steps: Vec<usize> = visits.iter().map(|&(t, _)| t).collect();
            steps.dedup();
            if self.chain_dead(&steps, s, self.req.tc) {
                continue;
            }
            surv += w;
            if !self.chain_dead(&steps, s, self.req.tr) && !self.windows_dead(visits, &steps, s) {
                res += w;
            }
        }
        100 * surv >= self.spec.cs_pct as u64 * self.total_weight
            && 100 * res >= self.spec.rcs_pct as u64 * self.total_weight
    }

    fn key(&self, b: &Branch, s: usize) -> Vec<i64> {
        let r = &self.req;
        let span = r.tc.max(r.tr) + 1;
        let mut key = vec![s as i64];
        for pos in &b.pos {
            match *pos {
                Pos::At { point, fuel } => key.extend([0, point.0 as i64, fuel]),
                Pos::Trip { from, to, refuel, arrive, reset } => {
                    key.extend([1, from.0 as i64, to.0 as i64, refuel as i64, arrive as i64, reset])
                }
            }
        }
        for visits in &b.log {
            let mut steps: Vec<usize> = visits.iter().map(|&(t, _)| t).collect();
            steps.dedup();
            key.push(-1);
            key.push(self.chain_dead(&steps, s, r.tc) as i64);
            key.push((self.chain_dead(&steps, s, r.tr) || self.windows_dead(visits, &steps, s)) as i64);
            for &(t, u) in visits {
                if t + span > s || (r.cyclic && t <= span) {
                    key.push(t as i64);
                    key.push(u as i64);
                }
            }
        }
        key
    }

    fn place(&self, b: &mut Branch, s: usize) {
        for (u, &pos) in b.pos.iter().enumerate() {
            let e = Self::event_of(pos, s);
            b.events[u].push(e);
            match pos {
                Pos::At { point, fuel } => {
                    b.fuel[u].push(Some(fuel));
                    b.log[point.index()].push((s, u));
                }
                Pos::Trip { .. } => b.fuel[u].push(None),
            }
        }
    }

    fn unplace(&self, b: &mut Branch, s: usize) {
        for u in 0..b.pos.len() {
            b.events[u].pop();
            b.fuel[u].pop();
        }
        for visits in &mut b.log {
            while visits.last().is_some_and(|&(t, _)| t == s) {
                visits.pop();
            }
        }
    }

    fn finish(&self, b: &Branch) -> Option<Plan> {
        let horizon = self.req.horizon;
        if self.options.cyclic {
            for (u, uav) in self.spec.uavs.iter().enumerate() {
                let ok = matches!(b.pos[u], Pos::At { point, fuel }
                    if point == uav.init_point && fuel >= uav.init_fuel as i64 * self.scale);
                if !ok {
                    return None;
                }
            }
        }
        let mut plan = Plan {
            horizon,
            options: self.options,
            timelines: b.events.clone(),
            fuel: b.fuel.clone(),
            claimed_surveilled: Default::default(),
            claimed_resilient: Default::default(),
        };
        let report = coverage_scores(&plan, self.spec, self.crit);
        if !(report.cs_met && report.rcs_met) {
            return None;
        }
        plan.claimed_surveilled = report.surveilled_points;
        plan.claimed_resilient = report.resilient_points;
        Some(plan)
    }

    /// Depth-first search with steps `1..=s` placed.
    fn dfs(&self, b: &mut Branch, s: usize) -> Option<Plan> {
        if self.stop.load(Ordering::Relaxed) {
            return None;
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.limit {
            self.exhausted.store(true, Ordering::Relaxed);
            self.stop.store(true, Ordering::Relaxed);
            return None;
        }
        if s == self.req.horizon {
            return self.finish(b);
        }
        let key = self.key(b, s);
        if b.failed.contains(&key) {
            return None;
        }
        let options: Vec<Vec<Pos>> = (0..b.pos.len()).map(|u| self.moves(u, b.pos[u], s)).collect();
        let mut choice = vec![0; options.len()];
        if options.iter().all(|o| !o.is_empty()) {
            let saved = b.pos.clone();
            'joint: loop {
                for (u, &c) in choice.iter().enumerate() {
                    b.pos[u] = options[u][c];
                }
                let home = !self.options.cyclic || (0..b.pos.len()).all(|u| self.can_get_home(u, b.pos[u], s + 1));
                if home {
                    self.place(b, s + 1);
                    if self.promising(&b.log, s + 1) {
                        if let Some(plan) = self.dfs(b, s + 1) {
                            return Some(plan);
                        }
                    }
                    self.unplace(b, s + 1);
                }
                for u in (0..choice.len()).rev() {
                    choice[u] += 1;
                    if choice[u] < options[u].len() {
                        continue 'joint;
                    }
                    choice[u] = 0;
                }
                break;
            }
            b.pos = saved;
        }
        if !self.stop.load(Ordering::Relaxed) {
            b.failed.insert(key);
        }
        None
    }
}

/// Exhaustive search over all joint UAV trajectories. Reports `Sat` with a
/// witness plan, `Unsat` when no trajectory meets the requirements, or
/// `Unknown` when the node budget runs out.
pub fn solve_enumerative(
    spec: &ScenarioSpec,
    net: &SurvNet,
    crit: &CriticalityMap,
    options: EncodeOptions,
    limits: EnumLimits,
) -> Result<EnumerativeResult, EnumError> {
    solve_enumerative_with(spec, net, crit, options, limits, Exec::default())
}

pub fn solve_enumerative_with(
    spec: &ScenarioSpec,
    net: &SurvNet,
    crit: &CriticalityMap,
    options: EncodeOptions,
    limits: EnumLimits,
    exec: Exec,
) -> Result<EnumerativeResult, EnumError> {
    if net.n_points() > limits.max_points {
        return Err(EnumError::LimitExceeded(format!("{} points > {}", net.n_points(), limits.max_points)));
    }
    if spec.uavs.len() > limits.max_uavs || spec.uavs.is_empty() {
        return Err(EnumError::LimitExceeded(format!("{} UAVs, at most {}", spec.uavs.len(), limits.max_uavs)));
    }
    if spec.horizon > limits.max_horizon {
        return Err(EnumError::LimitExceeded(format!("horizon {} > {}", spec.horizon, limits.max_horizon)));
    }
    let started = Instant::now();
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let exhausted = AtomicBool::new(false);
    let weights = crit.quantized_point_weights();
    let search = Search {
        spec,
        net,
        req: Requirements::new(spec, &options),
        options,
        scale: options.fixed_point_scale.max(1) as i64,
        total_weight: weights.iter().sum(),
        weights,
        home_dist: spec.uavs.iter().map(|u| hop_distances(net, u.init_point)).collect(),
        crit,
        nodes: &nodes,
        limit: limits.max_nodes,
        stop: &stop,
        exhausted: &exhausted,
    };

    let n = spec.uavs.len();
    let start: Vec<Pos> =
        spec.uavs.iter().map(|u| Pos::At { point: u.init_point, fuel: u.init_fuel as i64 * search.scale }).collect();
    let fresh = |pos: Vec<Pos>| Branch {
        pos,
        events: vec![Vec::new(); n],
        fuel: vec![Vec::new(); n],
        log: vec![Vec::new(); net.n_points()],
        failed: HashSet::new(),
    };
    let feasible_start = (0..n).all(|u| match start[u] {
        Pos::At { point, fuel } => fuel >= search.reserve(u, point),
        Pos::Trip { .. } => false,
    });

    let witness = if !feasible_start {
        None
    } else if spec.horizon == 1 {
        let mut b = fresh(start.clone());
        search.place(&mut b, 1);
        search.finish(&b)
    } else {
        // split on the joint move into step 2
        let firsts: Vec<Vec<Pos>> = (0..n).map(|u| search.moves(u, start[u], 1)).collect();
        let mut joint: Vec<Vec<Pos>> = vec![Vec::new()];
        for opts in &firsts {
            joint = joint
                .into_iter()
                .flat_map(|prefix| {
                    opts.iter().map(move |&o| {
                        let mut next = prefix.clone();
                        next.push(o);
                        next
                    })
                })
                .collect();
        }
        exec.find_first(joint.len(), |i| {
            let mut b = fresh(start.clone());
            search.place(&mut b, 1);
            b.pos = joint[i].clone();
            if search.options.cyclic && !(0..n).all(|u| search.can_get_home(u, b.pos[u], 2)) {
                return None;
            }
            search.place(&mut b, 2);
            if !search.promising(&b.log, 2) {
                return None;
            }
            let found = search.dfs(&mut b, 2);
            if found.is_some() {
                stop.store(true, Ordering::Relaxed);
            }
            found
        })
    };

    let status = match (&witness, exhausted.load(Ordering::Relaxed)) {
        (Some(_), _) => SolveStatus::Sat,
        (None, true) => SolveStatus::Unknown,
        (None, false) => SolveStatus::Unsat,
    };
    let assignment = witness.as_ref().map(witness_values);
    let outcome = SolveOutcome {
        status,
        assignment,
        stats: SolveStats {
            wall_time: started.elapsed(),
            n_vars: 0,
            n_assertions: 0,
            nodes: nodes.load(Ordering::Relaxed),
        },
        message: (status == SolveStatus::Unknown).then(|| format!("node budget {} exhausted", limits.max_nodes)),
    };
    Ok(EnumerativeResult { outcome, witness })
}

/// Position, refuel and fuel values of a plan under the solver naming scheme.
fn witness_values(plan: &Plan) -> std::collections::BTreeMap<String, crate::encoder::Value> {
    use crate::encoder::Value;
    let mut out = std::collections::BTreeMap::new();
    for u in 0..plan.n_uavs() {
        for s in 1..=plan.horizon {
            match plan.event(u, s) {
                Event::Visit(p) => {
                    out.insert(format!("visit_{}_{}_{}", u + 1, p, s), Value::Bool(true));
                    if let Some(f) = plan.fuel_at(u, s) {
                        out.insert(format!("fuel_{}_{}", u + 1, s), Value::Int(f));
                    }
                }
                Event::AtBase => {
                    out.insert(format!("refuel_{}_{}", u + 1, s), Value::Bool(true));
                    out.insert(format!("away_{}_{}", u + 1, s), Value::Bool(true));
                }
                Event::DepartToBase(_) | Event::ReturnFromBase(_) => {
                    out.insert(format!("away_{}_{}", u + 1, s), Value::Bool(true));
                }
            }
            let leaving = s < plan.horizon && plan.event(u, s + 1).visited().is_none();
            match plan.event(u, s) {
                Event::Visit(p) if leaving => {
                    out.insert(format!("torefuel_{}_{}_{}", u + 1, p, s), Value::Bool(true));
                }
                Event::Visit(p) if s > 1 && plan.event(u, s - 1).visited().is_none() => {
                    out.insert(format!("refuelto_{}_{}_{}", u + 1, p, s), Value::Bool(true));
                }
                _ => {}
            }
        }
    }
    out
}

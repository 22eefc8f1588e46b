#![allow(dead_code)]

use std::fmt::Write as _;
use std::time::Duration;

use grid_sentinel::criticality::CriticalityMap;
use grid_sentinel::encoder::{encode, EncodeOptions};
use grid_sentinel::ingest::{parse_scenario, ScenarioSpec};
use grid_sentinel::solver::{decode, solve_model, SolveOutcome, DEFAULT_SOLVER_CMD};
use grid_sentinel::survnet::{build_net, SurvNet};
use rand::Rng;

pub fn solver_cmd() -> String {
    std::env::var("GRID_SENTINEL_SOLVER").unwrap_or_else(|_| DEFAULT_SOLVER_CMD.to_string())
}

pub const SOLVE_TIMEOUT: Duration = Duration::from_secs(60);

/// Survey-only scenario: a two-bus grid whose single line carries all points.
#[derive(Debug, Clone)]
pub struct Tiny {
    pub n_points: usize,
    pub segments: Vec<(u32, u32, Option<f64>)>,
    /// init point, init fuel, capacity, flight cost, hover cost
    pub uavs: Vec<(u32, u64, u64, u64, u64)>,
    pub horizon: usize,
    pub tc: usize,
    pub k: usize,
    pub tr: usize,
    pub cs: u32,
    pub rcs: u32,
    pub base: u32,
    pub cyclic: bool,
}

impl Tiny {
    pub fn text(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "# Number of Buses, Lines, Points, and Segments, Segment Length, UAVs, Period");
        let _ = writeln!(t, "2 1 {} {} 1 {} {}", self.n_points, self.segments.len(), self.uavs.len(), self.horizon);
        t.push_str("# Load Information\n2 50.0\n# Generation Information\n1 50.0\n");
        t.push_str("# Transmission Line Info\n1 2 0.1\n# Maximum Criticality Distance\n15\n");
        t.push_str("# Line Point Set\n1");
        for p in 3..=self.n_points {
            let _ = write!(t, " {p}");
        }
        t.push_str(" 2\n# Segments/Links\n");
        for &(a, b, r) in &self.segments {
            match r {
                Some(r) => {
                    let _ = writeln!(t, "{a} {b} {r}");
                }
                None => {
                    let _ = writeln!(t, "{a} {b}");
                }
            }
        }
        t.push_str("# UAV Properties\n");
        for &(p, f, c, ff, hf) in &self.uavs {
            let _ = writeln!(t, "{p} {f} {c} {ff} {hf}");
        }
        let _ = writeln!(t, "# Threshold Time between Two Consecutive Visits\n{}", self.tc);
        let _ = writeln!(t, "# Resiliency Requirements\n{} {}", self.k, self.tr);
        let _ = writeln!(t, "# Minimum Criticality Scores\n{} {}", self.cs, self.rcs);
        let _ = writeln!(t, "# Base Point\n{}", self.base);
        if self.cyclic {
            t.push_str("# Cyclic\n1\n");
        }
        t
    }

    pub fn spec(&self) -> ScenarioSpec {
        parse_scenario(&self.text()).expect("tiny scenario parses")
    }

    /// A path `1 - 3 - 4 - ... - n - 2`.
    pub fn path(n_points: usize) -> Vec<(u32, u32, Option<f64>)> {
        let order: Vec<u32> = std::iter::once(1).chain(3..=n_points as u32).chain(std::iter::once(2)).collect();
        order.windows(2).map(|w| (w[0], w[1], None)).collect()
    }
}

pub struct Instance {
    pub spec: ScenarioSpec,
    pub net: SurvNet,
    pub crit: CriticalityMap,
}

impl Instance {
    pub fn new(spec: ScenarioSpec, point_weights: Vec<f64>) -> Self {
        let net = build_net(&spec).expect("connected");
        let mut crit = CriticalityMap::uniform(spec.n_lines, spec.n_points);
        crit.point_weight = point_weights;
        Instance { spec, net, crit }
    }

    pub fn uniform(spec: ScenarioSpec) -> Self {
        let n = spec.n_points;
        Self::new(spec, vec![1.0; n])
    }

    pub fn solve_smt(&self, options: EncodeOptions) -> (SolveOutcome, grid_sentinel::encoder::ConstraintModel) {
        let model = encode(&self.spec, &self.net, &self.crit, options).expect("encodes");
        (solve_model(&model, &solver_cmd(), SOLVE_TIMEOUT), model)
    }

    pub fn solve_and_decode(&self, options: EncodeOptions) -> (SolveOutcome, Option<grid_sentinel::plan::Plan>) {
        let (outcome, model) = self.solve_smt(options);
        let plan = outcome.assignment.as_ref().map(|values| {
            let a = grid_sentinel::solver::assignment_from_values(&model, values);
            decode(&model, &a, &self.spec, &self.net, &self.crit).unwrap_or_else(|e| panic!("decode failed: {e}"))
        });
        (outcome, plan)
    }
}

/// Random connected tiny instance: up to `max_points` points, one or two UAVs.
pub fn random_tiny<R: Rng>(rng: &mut R, max_points: usize, max_horizon: usize) -> (Tiny, Vec<f64>) {
    let n = rng.gen_range(2..=max_points);
    let mut segments = Vec::new();
    // random spanning tree, then a few extra chords
    for p in 2..=n as u32 {
        let q = rng.gen_range(1..p);
        segments.push((q, p, None));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let a = rng.gen_range(1..=n as u32);
        let b = rng.gen_range(1..=n as u32);
        if a != b && !segments.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
            segments.push((a, b, None));
        }
    }
    for s in &mut segments {
        s.2 = match rng.gen_range(0..3) {
            0 => None,
            1 => Some(0.9),
            _ => Some(1.2),
        };
    }
    let horizon = rng.gen_range(4..=max_horizon);
    let base = rng.gen_range(1..=n as u32);
    let n_uavs = rng.gen_range(1..=2);
    let uavs = (0..n_uavs)
        .map(|_| {
            let cap = rng.gen_range(20..=60);
            let init = rng.gen_range(cap / 2..=cap);
            (rng.gen_range(1..=n as u32), init, cap, rng.gen_range(4..=8), rng.gen_range(1..=4))
        })
        .collect();
    let tc = rng.gen_range(2..=horizon);
    let tr = rng.gen_range(2..=horizon);
    let cs = [0, 40, 60, 80, 100][rng.gen_range(0..5)];
    let rcs = [0, 0, 30, cs][rng.gen_range(0..4)].min(cs);
    let tiny = Tiny {
        n_points: n,
        segments,
        uavs,
        horizon,
        tc,
        k: rng.gen_range(0..n_uavs),
        tr,
        cs,
        rcs,
        base,
        cyclic: rng.gen_bool(0.2),
    };
    let weights = (0..n).map(|_| [1.0, 2.0, 5.0][rng.gen_range(0..3)]).collect();
    (tiny, weights)
}

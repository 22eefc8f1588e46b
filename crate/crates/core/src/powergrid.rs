//! DC power flow and single-line contingency screening.
//!
//! Line outage distribution factors are computed from the bus sensitivity
//! matrix (inverse of the slack-reduced susceptance matrix) and used to
//! predict post-outage flows, which feed the performance index ranking.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::ingest::ScenarioSpec;

/// Balance tolerance on the sum of injections, in MW.
pub const BALANCE_TOL_MW: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("sensitivity matrix is singular (grid is disconnected)")]
    SingularMatrix,
    #[error("injections are unbalanced by {0} MW")]
    Unbalanced(f64),
    #[error("monitored and outaged line are the same ({0})")]
    SelfOutage(usize),
    #[error("outage of line {0} islands the grid")]
    IslandingOutage(usize),
    #[error("invalid grid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    /// Zero-based bus indices.
    pub from: usize,
    pub to: usize,
    pub reactance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n_buses: usize,
    slack: usize,
    branches: Vec<Branch>,
    injections: Vec<f64>,
}

impl Grid {
    pub fn new(n_buses: usize, slack: usize, branches: Vec<Branch>, injections: Vec<f64>) -> Result<Grid, GridError> {
        if n_buses == 0 || slack >= n_buses {
            return Err(GridError::Invalid(format!("slack {slack} outside {n_buses} buses")));
        }
        if injections.len() != n_buses {
            return Err(GridError::Invalid("one injection per bus required".into()));
        }
        for (i, b) in branches.iter().enumerate() {
            if b.from >= n_buses || b.to >= n_buses || b.from == b.to {
                return Err(GridError::Invalid(format!("line {} has bad endpoints", i + 1)));
            }
            if b.reactance.is_nan() || b.reactance <= 0.0 {
                return Err(GridError::Invalid(format!("line {} has non-positive reactance", i + 1)));
            }
        }
        Ok(Grid { n_buses, slack, branches, injections })
    }

    /// Builds the grid of a scenario with bus 1 as slack.
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Grid, GridError> {
        let branches = spec
            .lines
            .iter()
            .map(|l| Branch { from: l.from.index(), to: l.to.index(), reactance: l.reactance })
            .collect();
        Grid::new(spec.n_buses, 0, branches, spec.net_injections())
    }

    pub fn with_slack(mut self, slack: usize) -> Result<Grid, GridError> {
        if slack >= self.n_buses {
            return Err(GridError::Invalid(format!("slack {slack} outside {} buses", self.n_buses)));
        }
        self.slack = slack;
        Ok(self)
    }

    pub fn n_buses(&self) -> usize {
        self.n_buses
    }

    pub fn n_lines(&self) -> usize {
        self.branches.len()
    }

    pub fn slack(&self) -> usize {
        self.slack
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn injections(&self) -> &[f64] {
        &self.injections
    }

    /// Same grid with line `l` removed (used for outage re-solves).
    pub fn without_line(&self, l: usize) -> Grid {
        let mut g = self.clone();
        g.branches.remove(l);
        g
    }

    /// Whether the buses stay connected when `skip` is removed.
    pub fn is_connected_without(&self, skip: Option<usize>) -> bool {
        let mut parent: Vec<usize> = (0..self.n_buses).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = self.n_buses;
        for (i, b) in self.branches.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let (ra, rb) = (find(&mut parent, b.from), find(&mut parent, b.to));
            if ra != rb {
                parent[ra] = rb;
                components -= 1;
            }
        }
        components == 1
    }
}

/// Bus susceptance matrix: off-diagonal `-1/x` summed over parallel lines,
/// diagonal the sum of incident `1/x`.
pub fn build_susceptance(grid: &Grid) -> DMatrix<f64> {
    let n = grid.n_buses;
    let mut b = DMatrix::zeros(n, n);
    for br in &grid.branches {
        let y = 1.0 / br.reactance;
        b[(br.from, br.from)] += y;
        b[(br.to, br.to)] += y;
        b[(br.from, br.to)] -= y;
        b[(br.to, br.from)] -= y;
    }
    b
}

/// Inverse of the slack-reduced susceptance matrix, re-embedded with a zero
/// slack row and column.
pub fn sensitivity_matrix(grid: &Grid) -> Result<DMatrix<f64>, GridError> {
    if !grid.is_connected_without(None) {
        return Err(GridError::SingularMatrix);
    }
    let n = grid.n_buses;
    let b = build_susceptance(grid);
    let keep: Vec<usize> = (0..n).filter(|&i| i != grid.slack).collect();
    let m = keep.len();
    let mut x = DMatrix::zeros(n, n);
    if m == 0 {
        return Ok(x);
    }
    let reduced = DMatrix::from_fn(m, m, |r, c| b[(keep[r], keep[c])]);
    let inv = reduced.lu().try_inverse().ok_or(GridError::SingularMatrix)?;
    for (r, &i) in keep.iter().enumerate() {
        for (c, &j) in keep.iter().enumerate() {
            x[(i, j)] = inv[(r, c)];
        }
    }
    // symmetrize away round-off
    Ok((&x + x.transpose()) * 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowState {
    /// Signed MW per line, oriented from -> to.
    pub flows: Vec<f64>,
    /// Bus voltage angles in radians, slack = 0.
    pub angles: Vec<f64>,
}

impl FlowState {
    /// Largest per-bus Kirchhoff mismatch (injection minus net outflow).
    pub fn max_mismatch(&self, grid: &Grid) -> f64 {
        let mut net = grid.injections.clone();
        for (br, f) in grid.branches.iter().zip(&self.flows) {
            net[br.from] -= f;
            net[br.to] += f;
        }
        net.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

pub fn dc_power_flow(grid: &Grid) -> Result<FlowState, GridError> {
    let x = sensitivity_matrix(grid)?;
    dc_power_flow_with(grid, &x)
}

/// DC flow using an already computed sensitivity matrix for `grid`.
pub fn dc_power_flow_with(grid: &Grid, x: &DMatrix<f64>) -> Result<FlowState, GridError> {
    let imbalance: f64 = grid.injections.iter().sum();
    if imbalance.abs() > BALANCE_TOL_MW {
        return Err(GridError::Unbalanced(imbalance));
    }
    let p = nalgebra::DVector::from_column_slice(&grid.injections);
    let theta = x * p;
    let flows = grid.branches.iter().map(|br| (theta[br.from] - theta[br.to]) / br.reactance).collect();
    Ok(FlowState { flows, angles: theta.iter().copied().collect() })
}

/// Distribution factor of monitored line `l1` for the outage of `l2`:
/// post-outage flow on `l1` is `P_l1 + L * P_l2`.
pub fn lodf(grid: &Grid, x: &DMatrix<f64>, l1: usize, l2: usize) -> Result<f64, GridError> {
    if l1 == l2 {
        return Err(GridError::SelfOutage(l1));
    }
    if !grid.is_connected_without(Some(l2)) {
        return Err(GridError::IslandingOutage(l2));
    }
    Ok(lodf_unchecked(grid, x, l1, l2))
}

fn lodf_unchecked(grid: &Grid, x: &DMatrix<f64>, l1: usize, l2: usize) -> f64 {
    let m = grid.branches[l1];
    let o = grid.branches[l2];
    let (a, b) = (m.from, m.to);
    let (c, d) = (o.from, o.to);
    let numerator = (o.reactance / m.reactance) * (x[(a, c)] - x[(b, c)] - x[(a, d)] + x[(b, d)]);
    let denominator = o.reactance - (x[(c, c)] + x[(d, d)] - 2.0 * x[(c, d)]);
    numerator / denominator
}

#[derive(Debug, Clone, PartialEq)]
pub struct LodfMatrix {
    /// `factors[(monitored, outaged)]`; NaN on the diagonal and for islanding outages.
    pub factors: DMatrix<f64>,
    pub islanding: BTreeSet<usize>,
}

impl LodfMatrix {
    pub fn get(&self, monitored: usize, outaged: usize) -> Option<f64> {
        if monitored == outaged || self.islanding.contains(&outaged) {
            None
        } else {
            Some(self.factors[(monitored, outaged)])
        }
    }

    pub fn n_lines(&self) -> usize {
        self.factors.nrows()
    }
}

pub fn lodf_matrix(grid: &Grid, x: &DMatrix<f64>) -> LodfMatrix {
    lodf_matrix_with(grid, x, Exec::default())
}

pub fn lodf_matrix_with(grid: &Grid, x: &DMatrix<f64>, exec: Exec) -> LodfMatrix {
    let n = grid.n_lines();
    let islanding: BTreeSet<usize> = (0..n).filter(|&l| !grid.is_connected_without(Some(l))).collect();
    let columns = exec.map_range(n, |outaged| {
        (0..n)
            .map(|monitored| {
                if monitored == outaged || islanding.contains(&outaged) {
                    f64::NAN
                } else {
                    lodf_unchecked(grid, x, monitored, outaged)
                }
            })
            .collect::<Vec<_>>()
    });
    let factors = DMatrix::from_fn(n, n, |r, c| columns[c][r]);
    LodfMatrix { factors, islanding }
}

/// Flows on every line after the outage of `outaged`, predicted from the
/// distribution factors. The outaged line itself carries zero.
pub fn post_outage_flows(lodf: &LodfMatrix, base: &FlowState, outaged: usize) -> Option<Vec<f64>> {
    if lodf.islanding.contains(&outaged) {
        return None;
    }
    Some(
        (0..lodf.n_lines())
            .map(|l| match lodf.get(l, outaged) {
                Some(factor) => base.flows[l] + factor * base.flows[outaged],
                None => 0.0,
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiConfig {
    pub exponent_n: u32,
    /// Islanding outages score `sentinel_factor * max finite PI`.
    pub sentinel_factor: f64,
}

impl Default for PiConfig {
    fn default() -> Self {
        PiConfig { exponent_n: 1, sentinel_factor: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiScores {
    /// Performance index per outaged line.
    pub pi: Vec<f64>,
    pub exponent_n: u32,
    pub islanding: BTreeSet<usize>,
}

/// Default line ratings: `alpha * |base flow|`, floored at `floor_mw`.
pub fn default_capacities(base: &FlowState, alpha: f64, floor_mw: f64) -> Vec<f64> {
    base.flows.iter().map(|f| (alpha * f.abs()).max(floor_mw)).collect()
}

/// Capacities of a scenario: explicit entries where given, the alpha default elsewhere.
pub fn scenario_capacities(spec: &ScenarioSpec, base: &FlowState, alpha: f64, floor_mw: f64) -> Vec<f64> {
    let mut caps = default_capacities(base, alpha, floor_mw);
    if let Some(explicit) = &spec.capacities {
        for (&l, &cap) in explicit {
            caps[l] = cap;
        }
    }
    caps
}

pub fn performance_index(lodf: &LodfMatrix, base: &FlowState, capacities: &[f64], cfg: PiConfig) -> PiScores {
    performance_index_with(lodf, base, capacities, cfg, Exec::default())
}

pub fn performance_index_with(
    lodf: &LodfMatrix,
    base: &FlowState,
    capacities: &[f64],
    cfg: PiConfig,
    exec: Exec,
) -> PiScores {
    let n = lodf.n_lines();
    let power = 2 * cfg.exponent_n as i32;
    let finite: Vec<Option<f64>> = exec.map_range(n, |outaged| {
        post_outage_flows(lodf, base, outaged)
            .map(|post| (0..n).filter(|&l| l != outaged).map(|l| (post[l] / capacities[l]).powi(power)).sum())
    });
    let max_finite = finite.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let sentinel = if max_finite.is_finite() { cfg.sentinel_factor * max_finite } else { cfg.sentinel_factor };
    PiScores {
        pi: finite.into_iter().map(|v| v.unwrap_or(sentinel)).collect(),
        exponent_n: cfg.exponent_n,
        islanding: lodf.islanding.clone(),
    }
}

/// Everything the contingency screen produces for one scenario.
#[derive(Debug, Clone)]
pub struct GridAnalysis {
    pub grid: Grid,
    pub sensitivity: DMatrix<f64>,
    pub base: FlowState,
    pub lodf: LodfMatrix,
    pub capacities: Vec<f64>,
    pub pi: PiScores,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub capacity_alpha: f64,
    pub capacity_floor_mw: f64,
    pub pi: PiConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { capacity_alpha: 1.5, capacity_floor_mw: 1.0, pi: PiConfig::default() }
    }
}

pub fn analyze(spec: &ScenarioSpec, cfg: AnalysisConfig) -> Result<GridAnalysis, GridError> {
    analyze_with(spec, cfg, Exec::default())
}

pub fn analyze_with(spec: &ScenarioSpec, cfg: AnalysisConfig, exec: Exec) -> Result<GridAnalysis, GridError> {
    let grid = Grid::from_spec(spec)?;
    let sensitivity = sensitivity_matrix(&grid)?;
    let base = dc_power_flow_with(&grid, &sensitivity)?;
    let lodf = lodf_matrix_with(&grid, &sensitivity, exec);
    let capacities = scenario_capacities(spec, &base, cfg.capacity_alpha, cfg.capacity_floor_mw);
    let pi = performance_index_with(&lodf, &base, &capacities, cfg.pi, exec);
    Ok(GridAnalysis { grid, sensitivity, base, lodf, capacities, pi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn br(from: usize, to: usize, x: f64) -> Branch {
        Branch { from, to, reactance: x }
    }

    #[test]
    fn susceptance_single_and_parallel() {
        let g = Grid::new(2, 0, vec![br(0, 1, 0.5)], vec![0.0, 0.0]).unwrap();
        assert_eq!(build_susceptance(&g), DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
        let g = Grid::new(2, 0, vec![br(0, 1, 1.0), br(0, 1, 1.0)], vec![0.0, 0.0]).unwrap();
        assert_eq!(build_susceptance(&g), DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
    }

    #[test]
    fn sensitivity_two_bus() {
        let g = Grid::new(2, 0, vec![br(0, 1, 0.5)], vec![0.0, 0.0]).unwrap();
        let x = sensitivity_matrix(&g).unwrap();
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.5]));
    }

    #[test]
    fn disconnected_is_singular() {
        let g = Grid::new(3, 0, vec![br(0, 1, 0.5)], vec![0.0; 3]).unwrap();
        assert_eq!(sensitivity_matrix(&g), Err(GridError::SingularMatrix));
    }

    #[test]
    fn two_bus_flow() {
        let g = Grid::new(2, 0, vec![br(0, 1, 0.5)], vec![100.0, -100.0]).unwrap();
        let f = dc_power_flow(&g).unwrap();
        assert!((f.flows[0] - 100.0).abs() < 1e-12);
        assert_eq!(f.angles[0], 0.0);
    }

    #[test]
    fn triangle_flow_matches_hand_solution() {
        // equal reactances, 90 MW from bus 1 to bus 3: direct path takes 2/3
        let g = Grid::new(3, 0, vec![br(0, 2, 0.1), br(0, 1, 0.1), br(1, 2, 0.1)], vec![90.0, 0.0, -90.0]).unwrap();
        let f = dc_power_flow(&g).unwrap();
        assert!((f.flows[0] - 60.0).abs() < 1e-9);
        assert!((f.flows[1] - 30.0).abs() < 1e-9);
        assert!((f.flows[2] - 30.0).abs() < 1e-9);
        assert!(f.max_mismatch(&g) < 1e-9);
    }

    #[test]
    fn unbalanced_rejected() {
        let g = Grid::new(2, 0, vec![br(0, 1, 0.5)], vec![100.0, -99.0]).unwrap();
        assert!(matches!(dc_power_flow(&g), Err(GridError::Unbalanced(_))));
    }

    #[test]
    fn parallel_twin_takes_all_flow() {
        let g = Grid::new(2, 0, vec![br(0, 1, 0.3), br(0, 1, 0.3)], vec![50.0, -50.0]).unwrap();
        let x = sensitivity_matrix(&g).unwrap();
        let l = lodf(&g, &x, 0, 1).unwrap();
        assert!((l.abs() - 1.0).abs() < 1e-12);
        assert_eq!(lodf(&g, &x, 0, 0), Err(GridError::SelfOutage(0)));
    }

    #[test]
    fn bridge_outage_islands() {
        let g = Grid::new(3, 0, vec![br(0, 1, 0.1), br(1, 2, 0.1)], vec![1.0, 0.0, -1.0]).unwrap();
        let x = sensitivity_matrix(&g).unwrap();
        assert_eq!(lodf(&g, &x, 0, 1), Err(GridError::IslandingOutage(1)));
        let m = lodf_matrix(&g, &x);
        assert_eq!(m.islanding, BTreeSet::from([0, 1]));
        assert_eq!(m.get(0, 1), None);
    }

    #[test]
    fn pi_equals_line_count_at_rating() {
        // triangle: outage of line 0 pushes 90 MW over the two-line path
        let g = Grid::new(3, 0, vec![br(0, 2, 0.1), br(0, 1, 0.1), br(1, 2, 0.1)], vec![90.0, 0.0, -90.0]).unwrap();
        let x = sensitivity_matrix(&g).unwrap();
        let base = dc_power_flow_with(&g, &x).unwrap();
        let m = lodf_matrix(&g, &x);
        let post = post_outage_flows(&m, &base, 0).unwrap();
        let caps = vec![1.0, post[1].abs(), post[2].abs()];
        let pi = performance_index(&m, &base, &caps, PiConfig::default());
        assert!((pi.pi[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn larger_exponent_shrinks_sub_unit_terms() {
        let g = Grid::new(3, 0, vec![br(0, 2, 0.1), br(0, 1, 0.1), br(1, 2, 0.1)], vec![90.0, 0.0, -90.0]).unwrap();
        let x = sensitivity_matrix(&g).unwrap();
        let base = dc_power_flow_with(&g, &x).unwrap();
        let m = lodf_matrix(&g, &x);
        let caps = vec![200.0; 3];
        let one = performance_index(&m, &base, &caps, PiConfig { exponent_n: 1, ..Default::default() });
        let two = performance_index(&m, &base, &caps, PiConfig { exponent_n: 2, ..Default::default() });
        for (a, b) in one.pi.iter().zip(&two.pi) {
            assert!(b < a);
        }
    }

    #[test]
    fn all_islanding_uses_bare_sentinel() {
        let g = Grid::new(2, 0, vec![br(0, 1, 0.5)], vec![10.0, -10.0]).unwrap();
        let x = sensitivity_matrix(&g).unwrap();
        let base = dc_power_flow_with(&g, &x).unwrap();
        let m = lodf_matrix(&g, &x);
        let pi = performance_index(&m, &base, &[15.0], PiConfig::default());
        assert_eq!(pi.pi, vec![10.0]);
        assert!(pi.islanding.contains(&0));
    }
}

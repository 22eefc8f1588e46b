//! Qualitative criticality levels from performance indices.
//!
//! Lines are clustered on their PI value with one-dimensional k-means; the
//! smallest cluster count whose worst member-to-center distance stays within
//! the configured bound wins. Every line takes its cluster center as weight
//! and points take the maximum weight over the lines they lie on.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::ingest::{PointId, ScenarioSpec};

/// Integer weight units assigned to the most critical point.
pub const WEIGHT_RESOLUTION: u64 = 10_000;

const MAX_LLOYD_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriticalityError {
    #[error("point {0} lies on no transmission line")]
    OrphanPoint(PointId),
    #[error("invalid clustering input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub centers: Vec<f64>,
    pub max_distance: f64,
}

/// Seeds: `k` evenly spaced order statistics of the distinct sorted values.
fn quantile_seeds(data: &[f64], k: usize) -> Vec<f64> {
    let mut distinct = data.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let d = distinct.len();
    if k == 1 {
        return vec![distinct[(d - 1) / 2]];
    }
    (0..k)
        .map(|i| {
            let idx = ((i * (d - 1)) as f64 / (k - 1) as f64).round() as usize;
            distinct[idx]
        })
        .collect()
}

fn nearest(centers: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (j, c) in centers.iter().enumerate().skip(1) {
        // strict comparison keeps ties on the lower index
        if (x - c).abs() < (x - centers[best]).abs() {
            best = j;
        }
    }
    best
}

/// Lloyd iteration to a fixed point of the assignment.
pub fn kmeans(data: &[f64], k: usize) -> Result<ClusterResult, CriticalityError> {
    if data.is_empty() || k == 0 || k > data.len() {
        return Err(CriticalityError::InvalidInput(format!("need 1 <= K <= {} (got {k})", data.len())));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(CriticalityError::InvalidInput("non-finite data point".into()));
    }
    let mut centers = quantile_seeds(data, k);
    let mut assignments: Vec<usize> = data.iter().map(|&x| nearest(&centers, x)).collect();
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&x, &a) in data.iter().zip(&assignments) {
            sums[a] += x;
            counts[a] += 1;
        }
        for j in 0..k {
            // empty clusters keep their previous center
            if counts[j] > 0 {
                centers[j] = sums[j] / counts[j] as f64;
            }
        }
        let next: Vec<usize> = data.iter().map(|&x| nearest(&centers, x)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    let max_distance = data.iter().zip(&assignments).map(|(&x, &a)| (x - centers[a]).abs()).fold(0.0, f64::max);
    Ok(ClusterResult { assignments, centers, max_distance })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalityMap {
    /// Cluster center per line.
    pub line_weight: Vec<f64>,
    /// 1-based level per line, ascending with weight.
    pub line_level: Vec<usize>,
    /// Weight per point, indexed by `PointId::index`.
    pub point_weight: Vec<f64>,
    /// Number of distinct levels.
    pub levels: usize,
    /// Cluster count chosen by the ranking.
    pub k: usize,
    pub max_distance: f64,
}

impl CriticalityMap {
    pub fn weight_of(&self, p: PointId) -> f64 {
        self.point_weight[p.index()]
    }

    /// Integer point weights, `WEIGHT_RESOLUTION` for the heaviest point.
    /// Coverage thresholds are evaluated on these so that the solver and the
    /// plan checker agree exactly.
    pub fn quantized_point_weights(&self) -> Vec<u64> {
        let max = self.point_weight.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return vec![0; self.point_weight.len()];
        }
        self.point_weight.iter().map(|w| ((w / max) * WEIGHT_RESOLUTION as f64).round() as u64).collect()
    }

    /// Level of a point (level of its heaviest line).
    pub fn point_level(&self, p: PointId) -> usize {
        let w = self.weight_of(p);
        self.line_weight
            .iter()
            .zip(&self.line_level)
            .filter(|(lw, _)| **lw == w)
            .map(|(_, lvl)| *lvl)
            .next()
            .unwrap_or(0)
    }

    /// All points share one weight; used by synthetic scenarios and tests.
    pub fn uniform(n_lines: usize, n_points: usize) -> CriticalityMap {
        CriticalityMap {
            line_weight: vec![1.0; n_lines],
            line_level: vec![1; n_lines],
            point_weight: vec![1.0; n_points],
            levels: 1,
            k: 1,
            max_distance: 0.0,
        }
    }
}

fn levels_of(centers: &[f64], assignments: &[usize]) -> (Vec<f64>, Vec<usize>, usize) {
    let mut used: Vec<f64> = assignments.iter().map(|&a| centers[a]).collect();
    used.sort_by(f64::total_cmp);
    used.dedup();
    let weights: Vec<f64> = assignments.iter().map(|&a| centers[a]).collect();
    let levels =
        weights.iter().map(|w| used.iter().position(|u| u == w).expect("weight is a used center") + 1).collect();
    (weights, levels, used.len())
}

/// Minimum-K clustering of the PI values with max intra-cluster distance `<= d`.
/// The returned map has no point weights yet; see [`point_weights`].
pub fn rank_criticality(pi: &[f64], d: f64) -> Result<CriticalityMap, CriticalityError> {
    rank_criticality_with(pi, d, Exec::Sequential)
}

/// As [`rank_criticality`]; the parallel strategy evaluates candidate cluster
/// counts concurrently and keeps the smallest admissible one.
pub fn rank_criticality_with(pi: &[f64], d: f64, exec: Exec) -> Result<CriticalityMap, CriticalityError> {
    if d.is_nan() || d < 0.0 {
        return Err(CriticalityError::InvalidInput("distance bound must be >= 0".into()));
    }
    if pi.is_empty() {
        return Err(CriticalityError::InvalidInput("no PI values".into()));
    }
    let n = pi.len();
    let found = exec.find_first(n, |i| match kmeans(pi, i + 1) {
        Ok(c) if c.max_distance <= d => Some(Ok((i + 1, c))),
        Ok(_) => None,
        Err(e) => Some(Err(e)),
    });
    let (k, clusters) = match found {
        Some(r) => r?,
        // floating round-off can leave K = n marginally above d
        None => (n, kmeans(pi, n)?),
    };
    let (line_weight, line_level, levels) = levels_of(&clusters.centers, &clusters.assignments);
    Ok(CriticalityMap {
        line_weight,
        line_level,
        point_weight: Vec::new(),
        levels,
        k,
        max_distance: clusters.max_distance,
    })
}

/// Projects line weights onto points; junction points take the maximum.
pub fn point_weights(map: &CriticalityMap, spec: &ScenarioSpec) -> Result<CriticalityMap, CriticalityError> {
    let mut weights: Vec<Option<f64>> = vec![None; spec.n_points];
    for lp in &spec.line_points {
        let w = map.line_weight[lp.line];
        for p in &lp.points {
            let slot = &mut weights[p.index()];
            *slot = Some(slot.map_or(w, |cur: f64| cur.max(w)));
        }
    }
    let point_weight = weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or(CriticalityError::OrphanPoint(PointId(i as u32 + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CriticalityMap { point_weight, ..map.clone() })
}

/// Ranking followed by point projection, using the scenario's distance bound.
pub fn criticality_for(spec: &ScenarioSpec, pi: &[f64]) -> Result<CriticalityMap, CriticalityError> {
    let lines = rank_criticality_with(pi, spec.pi_distance, Exec::default())?;
    point_weights(&lines, spec)
}

/// Points grouped by level, for reports.
pub fn points_by_level(map: &CriticalityMap) -> BTreeMap<usize, Vec<PointId>> {
    let mut out: BTreeMap<usize, Vec<PointId>> = BTreeMap::new();
    for i in 0..map.point_weight.len() {
        let p = PointId(i as u32 + 1);
        out.entry(map.point_level(p)).or_default().push(p);
    }
    out
}

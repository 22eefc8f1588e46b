//! Surveillance graph: points, segments, directional fuel-cost ratios and
//! hop distance to the refueling base.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::ingest::{PointId, ScenarioSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("surveillance network is disconnected (point {0} unreachable from the base)")]
    DisconnectedNetwork(PointId),
    #[error("segment {0}-{1} listed twice")]
    DuplicateSegment(PointId, PointId),
    #[error("segment {0}-{0} is a self-loop")]
    SelfLoop(PointId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvNet {
    n_points: usize,
    /// Sorted neighbor lists, indexed by `PointId::index`.
    adj: Vec<Vec<PointId>>,
    ratio: BTreeMap<(PointId, PointId), f64>,
    base_point: PointId,
    tb: Vec<usize>,
}

impl SurvNet {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (1..=self.n_points as u32).map(PointId)
    }

    pub fn neighbors(&self, p: PointId) -> &[PointId] {
        &self.adj[p.index()]
    }

    pub fn adjacent(&self, a: PointId, b: PointId) -> bool {
        self.adj[a.index()].binary_search(&b).is_ok()
    }

    /// Directional cost ratio for flying `from -> to`, if the segment exists.
    pub fn cost_ratio(&self, from: PointId, to: PointId) -> Option<f64> {
        self.ratio.get(&(from, to)).copied()
    }

    pub fn base_point(&self) -> PointId {
        self.base_point
    }

    /// Hops from `p` to the base.
    pub fn tb(&self, p: PointId) -> usize {
        self.tb[p.index()]
    }

    pub fn tb_all(&self) -> &[usize] {
        &self.tb
    }

    pub fn n_segments(&self) -> usize {
        self.ratio.len() / 2
    }
}

/// Fuel for one flight step `from -> to` in fixed-point units, rounded to nearest.
pub fn fly_cost(ffuel: u64, ratio: f64, scale: u64) -> i64 {
    (ffuel as f64 * ratio * scale as f64).round() as i64
}

pub fn build_net(spec: &ScenarioSpec) -> Result<SurvNet, NetError> {
    let n = spec.n_points;
    let mut adj: Vec<BTreeSet<PointId>> = vec![BTreeSet::new(); n];
    let mut ratio = BTreeMap::new();
    for seg in &spec.segments {
        if seg.a == seg.b {
            return Err(NetError::SelfLoop(seg.a));
        }
        if !adj[seg.a.index()].insert(seg.b) {
            return Err(NetError::DuplicateSegment(seg.a, seg.b));
        }
        adj[seg.b.index()].insert(seg.a);
        let r = seg.ratio_or_default();
        ratio.insert((seg.a, seg.b), r);
        ratio.insert((seg.b, seg.a), 1.0 / r);
    }
    let adj: Vec<Vec<PointId>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
    let tb = time_to_base(&adj, spec.base_point)?;
    Ok(SurvNet { n_points: n, adj, ratio, base_point: spec.base_point, tb })
}

/// Breadth-first hop count from every point to `base`.
pub fn time_to_base(adj: &[Vec<PointId>], base: PointId) -> Result<Vec<usize>, NetError> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    dist[base.index()] = 0;
    queue.push_back(base);
    while let Some(p) = queue.pop_front() {
        let d = dist[p.index()];
        for &q in &adj[p.index()] {
            if dist[q.index()] == usize::MAX {
                dist[q.index()] = d + 1;
                queue.push_back(q);
            }
        }
    }
    if let Some(i) = dist.iter().position(|&d| d == usize::MAX) {
        return Err(NetError::DisconnectedNetwork(PointId(i as u32 + 1)));
    }
    Ok(dist)
}

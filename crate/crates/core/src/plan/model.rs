use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::encoder::EncodeOptions;
use crate::ingest::PointId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Event {
    Visit(PointId),
    /// Flying toward the base after leaving `from`.
    DepartToBase(PointId),
    AtBase,
    /// Flying from the base toward `to`.
    ReturnFromBase(PointId),
}

impl Event {
    pub fn visited(self) -> Option<PointId> {
        match self {
            Event::Visit(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("malformed plan: {0}")]
    MalformedPlan(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Plan {
    pub horizon: usize,
    pub options: EncodeOptions,
    /// `timelines[u][s - 1]` is UAV `u`'s event at step `s`.
    pub timelines: Vec<Vec<Event>>,
    /// Fixed-point fuel at visit steps, same indexing as `timelines`.
    pub fuel: Vec<Vec<Option<i64>>>,
    pub claimed_surveilled: BTreeSet<PointId>,
    pub claimed_resilient: BTreeSet<PointId>,
}

impl Plan {
    pub fn n_uavs(&self) -> usize {
        self.timelines.len()
    }

    pub fn event(&self, uav: usize, step: usize) -> Event {
        self.timelines[uav][step - 1]
    }

    pub fn fuel_at(&self, uav: usize, step: usize) -> Option<i64> {
        self.fuel[uav][step - 1]
    }

    /// `(step, uav)` pairs per point, ordered by step then UAV; indexed by
    /// `PointId::index`.
    pub fn visit_log(&self, n_points: usize) -> Vec<Vec<(usize, usize)>> {
        let mut log = vec![Vec::new(); n_points];
        for s in 1..=self.horizon {
            for u in 0..self.n_uavs() {
                if let Some(p) = self.event(u, s).visited() {
                    if p.index() < n_points {
                        log[p.index()].push((s, u));
                    }
                }
            }
        }
        log
    }

    /// Checks shape against the fleet size and point count.
    pub fn check_shape(&self, n_uavs: usize, n_points: usize) -> Result<(), PlanError> {
        if self.horizon == 0 {
            return Err(PlanError::MalformedPlan("empty horizon".into()));
        }
        if self.timelines.len() != n_uavs || self.fuel.len() != n_uavs {
            return Err(PlanError::MalformedPlan(format!(
                "plan has {} timelines, fleet has {n_uavs} UAVs",
                self.timelines.len()
            )));
        }
        for (u, (t, f)) in self.timelines.iter().zip(&self.fuel).enumerate() {
            if t.len() != self.horizon || f.len() != self.horizon {
                return Err(PlanError::MalformedPlan(format!(
                    "UAV {} timeline has {} steps, horizon is {}",
                    u + 1,
                    t.len(),
                    self.horizon
                )));
            }
            for e in t {
                let p = match *e {
                    Event::Visit(p) | Event::DepartToBase(p) | Event::ReturnFromBase(p) => p,
                    Event::AtBase => continue,
                };
                if p.0 == 0 || p.index() >= n_points {
                    return Err(PlanError::MalformedPlan(format!("UAV {} refers to unknown point {p}", u + 1)));
                }
            }
        }
        for p in self.claimed_surveilled.iter().chain(&self.claimed_resilient) {
            if p.0 == 0 || p.index() >= n_points {
                return Err(PlanError::MalformedPlan(format!("claim for unknown point {p}")));
            }
        }
        Ok(())
    }
}

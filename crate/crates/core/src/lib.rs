//! Criticality-aware UAV surveillance planning for transmission grids.
//!
//! The pipeline reads a scenario, ranks lines by contingency severity using
//! line outage distribution factors, turns the ranking into point weights,
//! and synthesizes fuel-feasible UAV trajectories that keep the weighted
//! coverage above the requested thresholds, optionally tolerating `k` UAV
//! failures.

pub mod criticality;
pub mod encoder;
pub mod exec;
pub mod ingest;
pub mod plan;
pub mod powergrid;
pub mod solver;
pub mod survnet;

pub use exec::Exec;

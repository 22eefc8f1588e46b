//! Fleet-size and coverage searches built on repeated plan synthesis.

use anyhow::{bail, Result};
use grid_sentinel::encoder::EncodeOptions;
use grid_sentinel::solver::SolveStatus;
use rayon::prelude::*;
use serde::Serialize;

use crate::pipeline::{run_plan, Backend, Prepared};

/// Runs `f` over `items` on at most `jobs` threads, preserving order.
pub fn bounded_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeRow {
    pub n_uavs: usize,
    pub status: Option<SolveStatus>,
    pub wall_time_s: f64,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinUavsReport {
    /// Smallest fleet prefix whose model is Sat.
    pub minimal: Option<usize>,
    /// Sizes below `minimal` (or all sizes tried) whose outcome is undecided.
    pub unknown: Vec<usize>,
    pub rows: Vec<SizeRow>,
}

fn size_row(prep: &Prepared, n: usize, options: EncodeOptions, backend: &Backend) -> SizeRow {
    let sub = prep.with_spec(prep.spec.with_fleet_prefix(n));
    match run_plan(&sub, options, backend, None) {
        Ok(run) => SizeRow {
            n_uavs: n,
            status: Some(run.outcome.status),
            wall_time_s: run.outcome.stats.wall_time.as_secs_f64(),
            message: run.outcome.message,
        },
        Err(e) => SizeRow { n_uavs: n, status: None, wall_time_s: 0.0, message: Some(format!("{e:#}")) },
    }
}

/// Linear search over fleet prefixes 1..=pool. Up to `jobs` sizes are tried
/// at once; the search stops after the first batch containing a Sat size.
/// Fails when every size is Unsat.
pub fn min_uavs(prep: &Prepared, options: EncodeOptions, backend: &Backend, jobs: usize) -> Result<MinUavsReport> {
    let pool = prep.spec.uavs.len();
    if pool == 0 {
        bail!("scenario has no UAVs");
    }
    let sizes: Vec<usize> = (1..=pool).collect();
    let mut rows = Vec::new();
    for batch in sizes.chunks(jobs.max(1)) {
        rows.extend(bounded_map(jobs, batch, |&n| size_row(prep, n, options, backend))?);
        if rows.iter().any(|r| r.status == Some(SolveStatus::Sat)) {
            break;
        }
    }
    let minimal = rows.iter().find(|r| r.status == Some(SolveStatus::Sat)).map(|r| r.n_uavs);
    let unknown: Vec<usize> = rows
        .iter()
        .filter(|r| minimal.is_none_or(|m| r.n_uavs < m))
        .filter(|r| r.status != Some(SolveStatus::Unsat))
        .map(|r| r.n_uavs)
        .collect();
    rows.retain(|r| minimal.is_none_or(|m| r.n_uavs <= m));
    if minimal.is_none() && unknown.is_empty() {
        bail!("no fleet prefix up to {pool} UAVs is satisfiable");
    }
    Ok(MinUavsReport { minimal, unknown, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxCoverage {
    /// Largest integer coverage percentage proven Sat.
    pub best_pct: Option<u32>,
    /// Some probe was undecided, so `best_pct` is only a lower bound.
    pub undecided: bool,
    pub probes: Vec<(u32, SolveStatus)>,
}

/// Binary search for the largest coverage requirement the fleet can meet,
/// with the resilient coverage requirement dropped. Satisfiability is
/// monotone in the requirement, so Unknown probes are treated as failures.
pub fn max_coverage(prep: &Prepared, options: EncodeOptions, backend: &Backend) -> Result<MaxCoverage> {
    let probe = |pct: u32| {
        let mut spec = prep.spec.clone();
        spec.cs_pct = pct;
        spec.rcs_pct = 0;
        run_plan(&prep.with_spec(spec), options, backend, None)
    };
    let mut probes = Vec::new();
    let mut undecided = false;
    let mut lo = None::<u32>;
    let mut span = (0u32, 100u32);
    while span.0 <= span.1 {
        let mid = (span.0 + span.1) / 2;
        let status = probe(mid)?.outcome.status;
        probes.push((mid, status));
        match status {
            SolveStatus::Sat => {
                lo = Some(mid);
                span.0 = mid + 1;
            }
            SolveStatus::Unsat | SolveStatus::Unknown | SolveStatus::Timeout => {
                undecided |= status != SolveStatus::Unsat;
                if mid == 0 {
                    break;
                }
                span.1 = mid - 1;
            }
            SolveStatus::SolverError => bail!("solver error at coverage {mid}%"),
        }
    }
    Ok(MaxCoverage { best_pct: lo, undecided, probes })
}

//! One-variable experiment sweeps over a prepared scenario.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use anyhow::{bail, Result};
use grid_sentinel::encoder::EncodeOptions;
use grid_sentinel::ingest::ScenarioSpec;
use grid_sentinel::solver::SolveStatus;
use serde::Serialize;

use crate::pipeline::{run_plan, Backend, Prepared};
use crate::search::bounded_map;

/// First line of every sweep CSV.
pub const SWEEP_SCHEMA: &str = "# grid-sentinel sweep v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    CsPct,
    NUavs,
    K,
    Tc,
    Tr,
    Horizon,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 6] = [
        SweepVariable::CsPct,
        SweepVariable::NUavs,
        SweepVariable::K,
        SweepVariable::Tc,
        SweepVariable::Tr,
        SweepVariable::Horizon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::CsPct => "cs_pct",
            SweepVariable::NUavs => "n_uavs",
            SweepVariable::K => "k",
            SweepVariable::Tc => "tc",
            SweepVariable::Tr => "tr",
            SweepVariable::Horizon => "horizon",
        }
    }

    /// Copy of `spec` with this variable set to `value`.
    pub fn apply(self, spec: &ScenarioSpec, value: usize) -> Result<ScenarioSpec> {
        let mut out = spec.clone();
        match self {
            SweepVariable::CsPct => {
                if value > 100 {
                    bail!("cs_pct {value} exceeds 100");
                }
                out.cs_pct = value as u32;
            }
            SweepVariable::NUavs => {
                if value == 0 || value > spec.uavs.len() {
                    bail!("n_uavs {value} outside the pool of {} UAVs", spec.uavs.len());
                }
                out = spec.with_fleet_prefix(value);
            }
            SweepVariable::K => out.k = value,
            SweepVariable::Tc => out.tc = value,
            SweepVariable::Tr => out.tr = value,
            SweepVariable::Horizon => out.horizon = value,
        }
        Ok(out)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.replace('-', "_");
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.name() == key || (key == "horizon_s" && *v == SweepVariable::Horizon))
            .ok_or_else(|| format!("unknown sweep variable {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    values: Vec<usize>,
}

impl SweepSpec {
    /// Values must be non-empty; they are sorted and deduplicated.
    pub fn new(variable: SweepVariable, mut values: Vec<usize>) -> Result<SweepSpec> {
        if values.is_empty() {
            bail!("sweep needs at least one value");
        }
        values.sort_unstable();
        values.dedup();
        Ok(SweepSpec { variable, values })
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: usize,
    /// None when the row failed before or after solving.
    pub status: Option<SolveStatus>,
    pub cs_achieved: Option<f64>,
    pub rcs_achieved: Option<f64>,
    pub wall_time_s: f64,
    pub message: Option<String>,
}

fn sweep_row(
    prep: &Prepared,
    variable: SweepVariable,
    value: usize,
    options: EncodeOptions,
    backend: &Backend,
) -> SweepRow {
    let failed = |msg: String| SweepRow {
        value,
        status: None,
        cs_achieved: None,
        rcs_achieved: None,
        wall_time_s: 0.0,
        message: Some(msg),
    };
    let spec = match variable.apply(&prep.spec, value) {
        Ok(s) => s,
        Err(e) => return failed(format!("{e:#}")),
    };
    match run_plan(&prep.with_spec(spec), options, backend, None) {
        Ok(run) => SweepRow {
            value,
            status: Some(run.outcome.status),
            cs_achieved: run.coverage.as_ref().map(|c| c.cs_achieved),
            rcs_achieved: run.coverage.as_ref().map(|c| c.rcs_achieved),
            wall_time_s: run.outcome.stats.wall_time.as_secs_f64(),
            message: run.outcome.message,
        },
        Err(e) => failed(format!("{e:#}")),
    }
}

/// One row per value, in value order. Row failures are recorded, not raised.
pub fn run_sweep(
    prep: &Prepared,
    sweep: &SweepSpec,
    options: EncodeOptions,
    backend: &Backend,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    bounded_map(jobs, sweep.values(), |&v| sweep_row(prep, sweep.variable, v, options, backend))
}

fn status_name(s: Option<SolveStatus>) -> &'static str {
    match s {
        Some(SolveStatus::Sat) => "sat",
        Some(SolveStatus::Unsat) => "unsat",
        Some(SolveStatus::Unknown) => "unknown",
        Some(SolveStatus::Timeout) => "timeout",
        Some(SolveStatus::SolverError) => "solver_error",
        None => "error",
    }
}

pub fn write_sweep_csv<W: Write>(mut out: W, variable: SweepVariable, rows: &[SweepRow]) -> Result<()> {
    writeln!(out, "{SWEEP_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([variable.name(), "status", "cs_achieved", "rcs_achieved", "wall_time_s", "message"])?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.value.to_string(),
            status_name(r.status).to_string(),
            opt(r.cs_achieved),
            opt(r.rcs_achieved),
            format!("{:.3}", r.wall_time_s),
            r.message.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Wall time against the swept value.
pub fn sweep_svg(variable: SweepVariable, rows: &[SweepRow]) -> String {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.status.is_some()).map(|r| (r.value as f64, r.wall_time_s)).collect();
    crate::svg::line_chart(&format!("solve time by {variable}"), variable.name(), "wall time (s)", &pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_sorts_and_rejects_empty() {
        let s = SweepSpec::new(SweepVariable::Tc, vec![35, 25, 30, 25]).unwrap();
        assert_eq!(s.values(), &[25, 30, 35]);
        assert!(SweepSpec::new(SweepVariable::Tc, vec![]).is_err());
    }

    #[test]
    fn variable_names_round_trip() {
        for v in SweepVariable::ALL {
            assert_eq!(v.name().parse::<SweepVariable>().unwrap(), v);
        }
        assert_eq!("horizon_S".to_lowercase().parse::<SweepVariable>().unwrap(), SweepVariable::Horizon);
        assert!("fuel".parse::<SweepVariable>().is_err());
    }

    #[test]
    fn csv_marks_failed_rows() {
        let rows = vec![
            SweepRow {
                value: 1,
                status: Some(SolveStatus::Sat),
                cs_achieved: Some(80.0),
                rcs_achieved: Some(50.0),
                wall_time_s: 1.5,
                message: None,
            },
            SweepRow {
                value: 2,
                status: None,
                cs_achieved: None,
                rcs_achieved: None,
                wall_time_s: 0.0,
                message: Some("bad, value".into()),
            },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, SweepVariable::K, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# grid-sentinel sweep v1\nk,status,cs_achieved,rcs_achieved,wall_time_s,message\n\
             1,sat,80.0000,50.0000,1.500,\n2,error,,,0.000,\"bad, value\"\n"
        );
    }
}

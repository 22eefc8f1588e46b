//! Scenario preparation and a single plan synthesis run, shared by all
//! subcommands.

use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use grid_sentinel::criticality::{criticality_for, CriticalityMap};
use grid_sentinel::encoder::{encode, EncodeOptions};
use grid_sentinel::ingest::{parse_scenario, ScenarioSpec};
use grid_sentinel::plan::{coverage_scores, inject_failures, AuditReport, CoverageReport, Plan};
use grid_sentinel::powergrid::{analyze, AnalysisConfig, GridAnalysis};
use grid_sentinel::solver::{
    assignment_from_values, decode, solve_enumerative, solve_external, to_smtlib, EnumLimits, SolveOutcome, SolveStatus,
};
use grid_sentinel::survnet::{build_net, SurvNet};
use serde::Serialize;

pub const EXIT_SAT: i32 = 0;
pub const EXIT_UNSAT: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

pub fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Sat => EXIT_SAT,
        SolveStatus::Unsat => EXIT_UNSAT,
        SolveStatus::Unknown | SolveStatus::Timeout => EXIT_UNKNOWN,
        SolveStatus::SolverError => EXIT_ERROR,
    }
}

/// Reads and parses a scenario file; `-` reads standard input.
pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin()).context("reading standard input")?
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_scenario(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A scenario with its grid analysis, point weights and surveillance graph.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: ScenarioSpec,
    pub analysis: GridAnalysis,
    pub crit: CriticalityMap,
    pub net: SurvNet,
}

impl Prepared {
    /// Same grid and weights with a modified surveillance scenario.
    pub fn with_spec(&self, spec: ScenarioSpec) -> Prepared {
        Prepared { spec, ..self.clone() }
    }
}

pub fn prepare(spec: ScenarioSpec, cfg: AnalysisConfig) -> Result<Prepared> {
    let analysis = analyze(&spec, cfg).context("grid analysis")?;
    let crit = criticality_for(&spec, &analysis.pi.pi).context("criticality ranking")?;
    let net = build_net(&spec).context("surveillance network")?;
    Ok(Prepared { spec, analysis, crit, net })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    External { cmd: String, timeout: Duration },
    Enumerative(EnumLimits),
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanRun {
    pub outcome: SolveOutcome,
    #[serde(skip)]
    pub plan: Option<Plan>,
    pub coverage: Option<CoverageReport>,
    pub audit: Option<AuditReport>,
}

/// Encodes, solves and, on `Sat`, decodes and scores the plan. Decoding
/// failures are tool errors.
pub fn run_plan(
    prep: &Prepared,
    options: EncodeOptions,
    backend: &Backend,
    emit_smt2: Option<&Path>,
) -> Result<PlanRun> {
    let spec = &prep.spec;
    let (outcome, plan) = match backend {
        Backend::External { cmd, timeout } => {
            let model = encode(spec, &prep.net, &prep.crit, options)?;
            let script = to_smtlib(&model);
            if let Some(path) = emit_smt2 {
                std::fs::write(path, &script).with_context(|| format!("writing {}", path.display()))?;
            }
            let mut outcome = solve_external(&script, cmd, *timeout);
            outcome.stats.n_vars = model.n_vars();
            outcome.stats.n_assertions = model.assertions.len();
            let plan = match &outcome.assignment {
                Some(values) => {
                    let a = assignment_from_values(&model, values);
                    Some(decode(&model, &a, spec, &prep.net, &prep.crit)?)
                }
                None => None,
            };
            (outcome, plan)
        }
        Backend::Enumerative(limits) => {
            if emit_smt2.is_some() {
                bail!("--emit-smt2 needs the external solver back end");
            }
            let r = solve_enumerative(spec, &prep.net, &prep.crit, options, *limits)?;
            (r.outcome, r.witness)
        }
    };
    let coverage = plan.as_ref().map(|p| coverage_scores(p, spec, &prep.crit));
    let audit = match &plan {
        Some(p) if spec.k < p.n_uavs() => Some(inject_failures(p, spec, spec.k)?),
        _ => None,
    };
    Ok(PlanRun { outcome, plan, coverage, audit })
}

//! Subcommand implementations. Each returns the process exit code.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use grid_sentinel::encoder::EncodeOptions;
use grid_sentinel::plan::{coverage_scores, inject_failures, read_plan, validate, write_plan};
use grid_sentinel::powergrid::{AnalysisConfig, PiConfig};
use grid_sentinel::solver::{EnumLimits, DEFAULT_SOLVER_CMD};
use serde_json::json;

use crate::pipeline::{
    exit_code, load_scenario, prepare, run_plan, Backend, Prepared, EXIT_ERROR, EXIT_SAT, EXIT_UNKNOWN, EXIT_UNSAT,
};
use crate::search::min_uavs;
use crate::sweep::{run_sweep, sweep_svg, write_sweep_csv, SweepSpec, SweepVariable};

/// First line of every analysis CSV.
pub const ANALYSIS_SCHEMA: &str = "# grid-sentinel analysis v1";

#[derive(Debug, Parser)]
#[command(
    name = "grid-sentinel",
    version,
    about = "Criticality-aware UAV surveillance planning for transmission grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Contingency screen: flows, LODF, PI and point weights as CSV.
    Analyze(AnalyzeArgs),
    /// Synthesize a surveillance plan.
    Plan(PlanArgs),
    /// Check a plan file against a scenario.
    Validate(ValidateArgs),
    /// Smallest prefix of the UAV pool that meets the requirements.
    MinUavs(MinUavsArgs),
    /// Solve once per value of one scenario parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Default line capacity as a multiple of the base-case flow.
    #[arg(long, default_value_t = 1.5)]
    pub capacity_alpha: f64,
    /// Exponent of the performance index.
    #[arg(long, default_value_t = 1)]
    pub pi_exponent: u32,
}

impl GridArgs {
    pub fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            capacity_alpha: self.capacity_alpha,
            pi: PiConfig { exponent_n: self.pi_exponent, ..PiConfig::default() },
            ..AnalysisConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// SMT-LIB2 solver reading the script on standard input.
    #[arg(long, env = "GRID_SENTINEL_SOLVER", default_value = DEFAULT_SOLVER_CMD)]
    pub solver_cmd: String,
    /// Per-solve timeout in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub timeout_s: f64,
    /// Use the built-in exhaustive search instead of an external solver (tiny instances only).
    #[arg(long)]
    pub enumerative: bool,
    /// Require the plan to be repeatable: end where it began with no less fuel.
    #[arg(long)]
    pub cyclic: bool,
}

impl SolverArgs {
    pub fn backend(&self) -> Backend {
        if self.enumerative {
            Backend::Enumerative(EnumLimits::default())
        } else {
            Backend::External {
                cmd: self.solver_cmd.clone(),
                timeout: Duration::from_secs_f64(self.timeout_s.max(0.0)),
            }
        }
    }

    pub fn options(&self, prep: &Prepared) -> EncodeOptions {
        let mut o = EncodeOptions::for_spec(&prep.spec);
        o.cyclic |= self.cyclic;
        o
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Scenario file, or - for standard input.
    pub scenario: PathBuf,
    /// Directory receiving flows.csv, lodf.csv, pi.csv and weights.csv.
    #[arg(long, short, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    pub scenario: PathBuf,
    /// Plan file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// JSON report with solver statistics, coverage and audit.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the SMT-LIB2 script.
    #[arg(long)]
    pub emit_smt2: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub scenario: PathBuf,
    pub plan: PathBuf,
    /// JSON report; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MinUavsArgs {
    pub scenario: PathBuf,
    /// Coverage requirement in percent, overriding the scenario.
    #[arg(long)]
    pub cs: Option<u32>,
    /// Resilient coverage requirement in percent, overriding the scenario.
    #[arg(long)]
    pub rcs: Option<u32>,
    /// Fleet sizes tried concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    /// One of cs_pct, n_uavs, k, tc, tr, horizon.
    #[arg(long)]
    pub variable: SweepVariable,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<usize>,
    /// CSV output; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Wall-time chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Rows solved concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Plan(a) => cmd_plan(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::MinUavs(a) => cmd_min_uavs(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_ERROR
    })
}

fn load_prepared(path: &Path, grid: &GridArgs) -> Result<Prepared> {
    prepare(load_scenario(path)?, grid.config())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let mut f = create(path)?;
    writeln!(f, "{ANALYSIS_SCHEMA}")?;
    Ok(csv::Writer::from_writer(f))
}

/// Writes the analysis CSVs for `prep` into `dir`.
pub fn write_analysis(prep: &Prepared, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let a = &prep.analysis;
    let n = a.lodf.n_lines();

    let mut w = csv_writer(&dir.join("flows.csv"))?;
    w.write_record(["line", "from", "to", "flow_mw", "capacity_mw"])?;
    for (l, line) in prep.spec.lines.iter().enumerate() {
        w.write_record([
            (l + 1).to_string(),
            line.from.0.to_string(),
            line.to.0.to_string(),
            a.base.flows[l].to_string(),
            a.capacities[l].to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("lodf.csv"))?;
    w.write_record(["monitored", "outaged", "lodf"])?;
    for outaged in 0..n {
        for monitored in 0..n {
            let v = a.lodf.get(monitored, outaged).map(|x| x.to_string()).unwrap_or_default();
            w.write_record([(monitored + 1).to_string(), (outaged + 1).to_string(), v])?;
        }
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("pi.csv"))?;
    w.write_record(["line", "pi", "islanding"])?;
    for (l, pi) in a.pi.pi.iter().enumerate() {
        let isl = if a.pi.islanding.contains(&l) { "1" } else { "0" };
        w.write_record([(l + 1).to_string(), pi.to_string(), isl.to_string()])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("weights.csv"))?;
    w.write_record(["point", "level", "weight"])?;
    for p in prep.spec.points() {
        w.write_record([p.0.to_string(), prep.crit.point_level(p).to_string(), prep.crit.weight_of(p).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32> {
    let prep = load_prepared(&args.scenario, &args.grid)?;
    write_analysis(&prep, &args.out_dir)?;
    let explicit = prep.spec.capacities.as_ref().map_or(0, |c| c.len());
    eprintln!(
        "{} lines, {} islanding, {} criticality levels; capacities: {} explicit, others {}x base flow (min {} MW)",
        prep.analysis.lodf.n_lines(),
        prep.analysis.pi.islanding.len(),
        prep.crit.levels,
        explicit,
        args.grid.capacity_alpha,
        AnalysisConfig::default().capacity_floor_mw
    );
    Ok(EXIT_SAT)
}

pub fn cmd_plan(args: &PlanArgs) -> Result<i32> {
    let prep = load_prepared(&args.scenario, &args.grid)?;
    let options = args.solver.options(&prep);
    let run = run_plan(&prep, options, &args.solver.backend(), args.emit_smt2.as_deref())?;
    if let Some(plan) = &run.plan {
        let text = write_plan(plan);
        match &args.output {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
    }
    let s = &run.outcome;
    match &run.coverage {
        Some(c) => eprintln!(
            "status {:?}; cs {:.2}% ({}), rcs {:.2}% ({}); {:.1}s",
            s.status,
            c.cs_achieved,
            c.surveilled_points.len(),
            c.rcs_achieved,
            c.resilient_points.len(),
            s.stats.wall_time.as_secs_f64()
        ),
        None => eprintln!(
            "status {:?}; {:.1}s{}",
            s.status,
            s.stats.wall_time.as_secs_f64(),
            s.message.as_deref().map(|m| format!("; {m}")).unwrap_or_default()
        ),
    }
    if let Some(path) = &args.report {
        write_json(Some(path), &serde_json::to_value(&run)?)?;
    }
    Ok(exit_code(run.outcome.status))
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<i32> {
    let prep = load_prepared(&args.scenario, &args.grid)?;
    let text = std::fs::read_to_string(&args.plan).with_context(|| format!("reading {}", args.plan.display()))?;
    let plan = read_plan(&text)?;
    let violations = validate(&plan, &prep.spec, &prep.net, &prep.crit)?;
    let coverage = coverage_scores(&plan, &prep.spec, &prep.crit);
    let audit = if prep.spec.k < plan.n_uavs() { Some(inject_failures(&plan, &prep.spec, prep.spec.k)?) } else { None };
    for v in &violations {
        eprintln!("{v}");
    }
    let report = json!({
        "valid": violations.is_empty(),
        "violations": violations,
        "coverage": coverage,
        "audit": audit,
    });
    write_json(args.report.as_deref(), &report)?;
    Ok(if violations.is_empty() { EXIT_SAT } else { EXIT_UNSAT })
}

pub fn cmd_min_uavs(args: &MinUavsArgs) -> Result<i32> {
    let mut prep = load_prepared(&args.scenario, &args.grid)?;
    if let Some(cs) = args.cs {
        prep.spec.cs_pct = cs;
    }
    if let Some(rcs) = args.rcs {
        prep.spec.rcs_pct = rcs;
    }
    let options = args.solver.options(&prep);
    let report = min_uavs(&prep, options, &args.solver.backend(), args.jobs)?;
    for r in &report.rows {
        let status = r.status.map(|s| format!("{s:?}")).unwrap_or_else(|| "Error".into());
        eprintln!(
            "{} uavs: {status} ({:.1}s){}",
            r.n_uavs,
            r.wall_time_s,
            r.message.as_deref().map(|m| format!(" {m}")).unwrap_or_default()
        );
    }
    write_json(None, &serde_json::to_value(&report)?)?;
    Ok(if report.minimal.is_some() { EXIT_SAT } else { EXIT_UNKNOWN })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let prep = load_prepared(&args.scenario, &args.grid)?;
    let sweep = SweepSpec::new(args.variable, args.values.clone())?;
    let options = args.solver.options(&prep);
    let rows = run_sweep(&prep, &sweep, options, &args.solver.backend(), args.jobs)?;
    match &args.output {
        Some(p) => write_sweep_csv(create(p)?, sweep.variable, &rows)?,
        None => write_sweep_csv(std::io::stdout().lock(), sweep.variable, &rows)?,
    }
    if let Some(p) = &args.svg {
        std::fs::write(p, sweep_svg(sweep.variable, &rows)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(EXIT_SAT)
}

//! Solving back ends: SMT-LIB2 emission with an external solver process, and
//! an enumerative search used as an oracle on small instances.

mod decode;
mod enumerative;
mod external;
pub mod sexpr;
mod smtlib;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Serialize, Serializer};

use crate::encoder::{ConstraintModel, Value};

pub use decode::{assignment_for_plan, assignment_from_values, decode, DecodeError};
pub use enumerative::{solve_enumerative, solve_enumerative_with, EnumError, EnumLimits, EnumerativeResult};
pub use external::{parse_response, solve_external};
pub use smtlib::to_smtlib;

pub const DEFAULT_SOLVER_CMD: &str = "z3 -in";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    SolverError,
}

fn seconds<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    #[serde(serialize_with = "seconds")]
    pub wall_time: Duration,
    pub n_vars: usize,
    pub n_assertions: usize,
    /// Search nodes visited by the enumerative back end.
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Present exactly when `status` is `Sat`.
    #[serde(skip)]
    pub assignment: Option<BTreeMap<String, Value>>,
    pub stats: SolveStats,
    pub message: Option<String>,
}

/// Emits `model`, solves it externally and records the model size.
pub fn solve_model(model: &ConstraintModel, solver_cmd: &str, timeout: Duration) -> SolveOutcome {
    let script = to_smtlib(model);
    let mut outcome = solve_external(&script, solver_cmd, timeout);
    outcome.stats.n_vars = model.n_vars();
    outcome.stats.n_assertions = model.assertions.len();
    outcome
}

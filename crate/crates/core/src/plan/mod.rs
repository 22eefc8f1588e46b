//! Concrete plans: event timelines, an independent rule checker, coverage
//! scoring from raw visit logs and exhaustive failure injection.

mod audit;
mod coverage;
mod io;
mod model;
mod validate;

pub use audit::{inject_failures, inject_failures_with, AuditReport, SubsetAudit};
pub use coverage::{
    coverage_scores, fresh_chain, is_resilient, is_surveilled, meets_threshold, CoverageReport, Requirements,
};
pub use io::{read_plan, write_plan, PLAN_HEADER};
pub use model::{Event, Plan, PlanError};
pub use validate::{validate, Rule, Violation};

//! Command-line front end: scenario analysis, plan synthesis and validation,
//! fleet-size search and parameter sweeps.

pub mod commands;
pub mod pipeline;
pub mod search;
pub mod svg;
pub mod sweep;

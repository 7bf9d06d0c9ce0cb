//! Command-line front end: configuration parsing, scenario presets, the
//! simulate/sweep/validate/oracle subcommands, and deterministic writers.

pub mod config;
pub mod oracle;
pub mod pipeline;
pub mod validate;
pub mod writers;

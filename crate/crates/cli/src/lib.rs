//! Library side of the `pvtag` command-line tool: scenario-file loading,
//! the trace CSV schema, and the subcommand bodies.

pub mod commands;
pub mod error;
pub mod scenario_file;
pub mod trace_csv;

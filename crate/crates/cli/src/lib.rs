//! Command-line front end for the `reflexgrid` simulator: scenario files, CSV
//! traces, metric summaries and SVG charts.

pub mod commands;
pub mod scenario_file;
pub mod svg;
pub mod trace_csv;

pub use commands::{CliError, Summary};
pub use scenario_file::{parse_scenario, ParseError, ScenarioSpec};

//! Library side of the `reward-rig` command-line tool.

pub mod bundle;
pub mod chart;
pub mod commands;
pub mod error;
pub mod report;
pub mod scenario_file;

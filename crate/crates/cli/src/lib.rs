//! Experiment front end: scenario files, built-in presets, trace and
//! metrics serialization, and the run/compare/validate commands.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;
pub mod svg;

pub use commands::{compare_command, run_command, validate_command, Overrides, RunArtifacts};
pub use config::{load_scenario, ScenarioFile, SCENARIO_SCHEMA_VERSION};

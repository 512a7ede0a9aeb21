//! Scenario configuration files.
//!
//! A scenario file is TOML with two top-level fields and the full
//! simulation description under `[scenario]`:
//!
//! ```toml
//! schema_version = 1
//! name = "two-robots"
//!
//! [scenario]
//! control_period = 0.033
//! duration = 30.0
//! seed = 42
//! nominal_gain = 1.0
//!
//! [scenario.robot]
//! damping = 1.0
//!
//! [scenario.topology]
//! n_robots = 2
//! edges = [
//!   { from = 0, to = 1, distance = 1.0, delay = 0.1 },
//!   { from = 1, to = 0, distance = 1.0, delay = 0.2 },
//! ]
//!
//! [scenario.initial]
//! mode = "explicit"
//! states = [
//!   { position = [0.0, 0.0], velocity = [0.0, 0.0] },
//!   { position = [1.4, 0.0], velocity = [0.0, 0.0] },
//! ]
//!
//! [scenario.delay_sampling]
//! mode = "explicit"          # or mode = "uniform", min = 0.0, max = 0.333
//!
//! [scenario.filter]          # omit the whole table to run unfiltered
//! alpha = 1.0
//! kappa = 1.0
//! variant = "input-and-damping"
//! initial_tank = 1.0
//! ```
//!
//! The resolved echo written next to every run uses the same schema with
//! all sampled quantities (delays, initial states) made explicit, so it is
//! itself a valid, re-runnable scenario file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tanksim_core::Scenario;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

fn default_schema_version() -> u32 {
    SCENARIO_SCHEMA_VERSION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub name: String,
    pub scenario: Scenario,
}

impl ScenarioFile {
    /// Returns the echo of this file with all randomness expanded.
    pub fn resolve(&self) -> Result<ScenarioFile> {
        let scenario = self.scenario.resolve()?;
        Ok(ScenarioFile {
            schema_version: self.schema_version,
            name: self.name.clone(),
            scenario,
        })
    }
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("in scenario file {}", path.display()))
}

/// Parses and validates scenario TOML. Parse errors carry line/field
/// positions from the TOML parser; validation errors name the violated
/// invariant.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    let file: ScenarioFile = toml::from_str(text).context("parse error")?;
    if file.schema_version != SCENARIO_SCHEMA_VERSION {
        bail!(
            "unsupported scenario schema version {} (expected {})",
            file.schema_version,
            SCENARIO_SCHEMA_VERSION
        );
    }
    file.scenario.validate().context("validation error")?;
    Ok(file)
}

pub fn to_toml(file: &ScenarioFile) -> Result<String> {
    Ok(toml::to_string(file)?)
}

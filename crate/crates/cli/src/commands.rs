//! run / compare / validate command implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use tanksim_core::simulator::{self, Metrics};

use crate::config::{self, ScenarioFile};
use crate::output::{self, MetricsReport};
use crate::presets;
use crate::svg;

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Replacement control period (s).
    pub dt: Option<f64>,
    pub duration: Option<f64>,
}

impl Overrides {
    fn apply(&self, file: &mut ScenarioFile) {
        if let Some(seed) = self.seed {
            file.scenario.seed = seed;
        }
        if let Some(dt) = self.dt {
            file.scenario.control_period = dt;
        }
        if let Some(duration) = self.duration {
            file.scenario.duration = duration;
        }
    }
}

/// Files produced by one run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub trace_path: PathBuf,
    pub metrics_path: PathBuf,
    /// Fully expanded scenario echo; re-running it reproduces the trace.
    pub resolved_path: PathBuf,
}

/// Resolves `spec` as either a path to a scenario file or a built-in
/// preset name.
pub fn resolve_config(spec: &str) -> Result<ScenarioFile> {
    let path = Path::new(spec);
    if path.exists() {
        return config::load_scenario(path);
    }
    if let Some(file) = presets::by_name(spec) {
        return Ok(file);
    }
    bail!(
        "'{spec}' is neither a scenario file nor a built-in preset (run `tanksim presets`)"
    )
}

/// Runs one scenario, writing trace.csv, metrics.toml, and resolved.toml
/// into `out_dir`.
pub fn run_command(
    file: &ScenarioFile,
    out_dir: &Path,
    overrides: Overrides,
    charts: bool,
) -> Result<(RunArtifacts, Metrics)> {
    let mut file = file.clone();
    overrides.apply(&mut file);
    let resolved = file.resolve()?;
    let trace = simulator::run(&resolved.scenario)?;
    let metrics = simulator::metrics(&trace);

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let artifacts = RunArtifacts {
        trace_path: out_dir.join("trace.csv"),
        metrics_path: out_dir.join("metrics.toml"),
        resolved_path: out_dir.join("resolved.toml"),
    };
    output::write_trace(&artifacts.trace_path, &trace)?;
    output::write_metrics(&artifacts.metrics_path, &MetricsReport::new(&file.name, &metrics))?;
    std::fs::write(&artifacts.resolved_path, config::to_toml(&resolved)?)
        .with_context(|| format!("cannot write {}", artifacts.resolved_path.display()))?;
    if charts {
        svg::write_charts(out_dir, &trace)?;
    }
    Ok((artifacts, metrics))
}

#[derive(Debug, Serialize)]
struct ComparedEdge {
    i: usize,
    j: usize,
    rms_a: f64,
    rms_b: f64,
    ratio: f64,
}

/// Paired final-window RMS errors of two runs over the same topology.
#[derive(Debug, Serialize)]
pub struct Comparison {
    pub scenario_a: String,
    pub scenario_b: String,
    /// Aggregate RMS (across edges) of run A over run B.
    pub overall_ratio: f64,
    pub overall_rms_a: f64,
    pub overall_rms_b: f64,
    edges: Vec<ComparedEdge>,
}

fn aggregate_rms(m: &Metrics) -> f64 {
    let ms = m.edge_rms.iter().map(|&(_, _, r)| r * r).sum::<f64>() / m.edge_rms.len() as f64;
    ms.sqrt()
}

/// Runs both scenarios (into `out_dir/a` and `out_dir/b`) and emits the
/// per-edge RMS comparison to `out_dir/comparison.toml`.
pub fn compare_command(
    file_a: &ScenarioFile,
    file_b: &ScenarioFile,
    out_dir: &Path,
    overrides: Overrides,
) -> Result<Comparison> {
    let mut a = file_a.clone();
    let mut b = file_b.clone();
    overrides.apply(&mut a);
    overrides.apply(&mut b);

    // The contrast is only meaningful over the same formation and delays.
    let edges_match = {
        let (ea, eb) = (&a.scenario.topology.edges, &b.scenario.topology.edges);
        ea.len() == eb.len()
            && ea.iter().zip(eb.iter()).all(|(x, y)| {
                x.from == y.from && x.to == y.to && x.distance == y.distance
            })
    };
    if a.scenario.topology.n_robots != b.scenario.topology.n_robots || !edges_match {
        bail!("topology mismatch between '{}' and '{}'", a.name, b.name);
    }
    if a.scenario.seed != b.scenario.seed {
        bail!(
            "delay seed mismatch between '{}' ({}) and '{}' ({})",
            a.name,
            a.scenario.seed,
            b.name,
            b.scenario.seed
        );
    }

    let (_, metrics_a) = run_command(&a, &out_dir.join("a"), Overrides::default(), false)?;
    let (_, metrics_b) = run_command(&b, &out_dir.join("b"), Overrides::default(), false)?;

    let edges = metrics_a
        .edge_rms
        .iter()
        .zip(&metrics_b.edge_rms)
        .map(|(&(i, j, ra), &(_, _, rb))| ComparedEdge { i, j, rms_a: ra, rms_b: rb, ratio: ra / rb })
        .collect();
    let (overall_rms_a, overall_rms_b) = (aggregate_rms(&metrics_a), aggregate_rms(&metrics_b));
    let comparison = Comparison {
        scenario_a: a.name.clone(),
        scenario_b: b.name.clone(),
        overall_ratio: overall_rms_a / overall_rms_b,
        overall_rms_a,
        overall_rms_b,
        edges,
    };
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("comparison.toml"), toml::to_string(&comparison)?)?;
    Ok(comparison)
}

/// Validates a scenario file or preset, returning its name.
pub fn validate_command(file: &ScenarioFile) -> Result<String> {
    file.scenario.validate()?;
    Ok(file.name.clone())
}

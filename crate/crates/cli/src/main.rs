use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use tanksim_cli::commands::{self, Overrides};
use tanksim_cli::{config, presets};

#[derive(Parser)]
#[command(
    name = "tanksim",
    about = "Formation control over delayed links with a dissipativity-preserving input filter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonOverrides {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the control period (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Override the run duration (s).
    #[arg(long)]
    duration: Option<f64>,
}

impl CommonOverrides {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, dt: self.dt, duration: self.duration }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trace.csv, metrics.toml, resolved.toml.
    Run {
        /// Scenario file path or built-in preset name.
        #[arg(long)]
        config: String,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        common: CommonOverrides,
        /// Also write SVG charts of edge distances and tank energies.
        #[arg(long)]
        svg: bool,
    },
    /// Run two scenarios over the same topology and compare edge errors.
    Compare {
        /// First scenario (file path or preset name).
        config_a: String,
        /// Second scenario (file path or preset name).
        config_b: String,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// List built-in presets (optionally writing them out as files).
    Presets {
        /// Write each preset as a scenario file into this directory.
        #[arg(long)]
        write_dir: Option<PathBuf>,
    },
    /// Validate a scenario file or preset.
    Validate {
        #[arg(long)]
        config: String,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out_dir, common, svg } => {
            let file = commands::resolve_config(&config)?;
            let (artifacts, metrics) =
                commands::run_command(&file, &out_dir, common.overrides(), svg)?;
            println!("trace:    {}", artifacts.trace_path.display());
            println!("metrics:  {}", artifacts.metrics_path.display());
            println!("resolved: {}", artifacts.resolved_path.display());
            if let Some(min_tank) = metrics.min_tank {
                println!("min tank energy: {min_tank:.3e}");
            }
            println!("max |u - u_nom|: {:.3e}", metrics.max_input_deviation);
            for (i, j, rms) in &metrics.edge_rms {
                println!("edge ({i},{j}) final-window rms: {rms:.4}");
            }
        }
        Command::Compare { config_a, config_b, out_dir, common } => {
            let a = commands::resolve_config(&config_a)?;
            let b = commands::resolve_config(&config_b)?;
            let cmp = commands::compare_command(&a, &b, &out_dir, common.overrides())?;
            println!(
                "{} rms {:.4} vs {} rms {:.4} -> ratio {:.2}",
                cmp.scenario_a, cmp.overall_rms_a, cmp.scenario_b, cmp.overall_rms_b,
                cmp.overall_ratio
            );
            println!("details: {}", out_dir.join("comparison.toml").display());
        }
        Command::Presets { write_dir } => {
            for (name, file) in presets::all() {
                let filter = match &file.scenario.filter {
                    Some(_) => "filtered",
                    None => "unfiltered",
                };
                println!(
                    "{name:22} {} robots, {filter}",
                    file.scenario.topology.n_robots
                );
                if let Some(dir) = &write_dir {
                    std::fs::create_dir_all(dir)?;
                    let path = dir.join(format!("{name}.toml"));
                    std::fs::write(&path, config::to_toml(&file)?)?;
                    println!("  wrote {}", path.display());
                }
            }
        }
        Command::Validate { config } => {
            let file = commands::resolve_config(&config)?;
            let name = commands::validate_command(&file)?;
            println!("ok: {name}");
        }
    }
    Ok(())
}

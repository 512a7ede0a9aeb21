//! Built-in scenarios: six robots on a minimally rigid hexagon formation
//! (ring plus three even diagonals), delayed links sampled uniformly from
//! [0, 0.333] s, 60 s at a 0.033 s control period.
//!
//! `fig2-nofilter` runs the raw weighted-consensus controller over the
//! delayed links; `fig3-filter` runs the same scenario with the
//! input-and-damping passivation filter. The `*-zerodelay` variants keep
//! everything else fixed but set every delay to zero.

use tanksim_core::delay::DirectedEdge;
use tanksim_core::{
    DelaySampling, FilterConfig, FilterVariant, InitialLayout, RobotParams, Scenario, Topology,
    Vec2,
};

use crate::config::{ScenarioFile, SCENARIO_SCHEMA_VERSION};

/// Circumradius of the target hexagon (m); side length equals the radius.
const HEX_RADIUS: f64 = 0.5;
/// Uniform perturbation applied to each initial coordinate (m).
const INITIAL_NOISE: f64 = 0.25;
const CONTROL_PERIOD: f64 = 0.033;
const DURATION: f64 = 60.0;
const DAMPING: f64 = 1.0;
const NOMINAL_GAIN: f64 = 4.0;
const SEED: u64 = 42;
/// Maximum link delay (s).
const DELAY_MAX: f64 = 0.333;

fn hexagon_topology() -> Topology {
    let side = HEX_RADIUS;
    let diagonal = HEX_RADIUS * 3.0_f64.sqrt();
    let mut edges = Vec::new();
    let mut link = |i: usize, j: usize, d: f64| {
        edges.push(DirectedEdge { from: i, to: j, distance: d, delay: 0.0 });
        edges.push(DirectedEdge { from: j, to: i, distance: d, delay: 0.0 });
    };
    for i in 0..6 {
        link(i, (i + 1) % 6, side);
    }
    // Even diagonals brace the ring: 9 undirected edges = 2n - 3.
    link(0, 2, diagonal);
    link(2, 4, diagonal);
    link(4, 0, diagonal);
    Topology { n_robots: 6, edges }
}

fn hexagon_anchors() -> Vec<Vec2> {
    (0..6)
        .map(|i| {
            let angle = std::f64::consts::PI / 3.0 * i as f64;
            Vec2::new(HEX_RADIUS * angle.cos(), HEX_RADIUS * angle.sin())
        })
        .collect()
}

fn base_scenario(delays: DelaySampling, filter: Option<FilterConfig>) -> Scenario {
    Scenario {
        topology: hexagon_topology(),
        robot: RobotParams { damping: DAMPING },
        initial: InitialLayout::Perturbed { anchors: hexagon_anchors(), noise: INITIAL_NOISE },
        control_period: CONTROL_PERIOD,
        physics_substeps: 1,
        duration: DURATION,
        filter,
        delay_sampling: delays,
        external_input: vec![],
        nominal_gain: NOMINAL_GAIN,
        seed: SEED,
    }
}

/// Tight budget so the filter visibly shapes the delayed transient.
fn default_filter() -> FilterConfig {
    FilterConfig {
        alpha: 0.2,
        kappa: 1.0,
        variant: FilterVariant::InputAndDamping,
        initial_tank: 0.02,
    }
}

/// Generous budget that never binds at zero delay; the filtered run then
/// reproduces the unfiltered trajectory exactly.
fn generous_filter() -> FilterConfig {
    FilterConfig {
        alpha: 1.0,
        kappa: 1.0,
        variant: FilterVariant::InputAndDamping,
        initial_tank: 1.0,
    }
}

fn random_delays() -> DelaySampling {
    DelaySampling::Uniform { min: 0.0, max: DELAY_MAX }
}

/// All built-in presets, as (name, scenario file) pairs.
pub fn all() -> Vec<(&'static str, ScenarioFile)> {
    let make = |name: &'static str, scenario: Scenario| {
        (
            name,
            ScenarioFile {
                schema_version: SCENARIO_SCHEMA_VERSION,
                name: name.to_string(),
                scenario,
            },
        )
    };
    vec![
        make("fig2-nofilter", base_scenario(random_delays(), None)),
        make("fig3-filter", base_scenario(random_delays(), Some(default_filter()))),
        make("nofilter-zerodelay", base_scenario(DelaySampling::Explicit, None)),
        make(
            "filter-zerodelay",
            base_scenario(DelaySampling::Explicit, Some(generous_filter())),
        ),
    ]
}

/// Looks up a preset by name.
pub fn by_name(name: &str) -> Option<ScenarioFile> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, f)| f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for (name, file) in all() {
            file.scenario
                .validate()
                .unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn fig_presets_match_the_experimental_setup() {
        let fig2 = by_name("fig2-nofilter").unwrap();
        assert_eq!(fig2.scenario.topology.n_robots, 6);
        assert!(fig2.scenario.filter.is_none());
        assert_eq!(
            fig2.scenario.delay_sampling,
            DelaySampling::Uniform { min: 0.0, max: 0.333 }
        );

        let fig3 = by_name("fig3-filter").unwrap();
        let filter = fig3.scenario.filter.expect("filter configured");
        assert_eq!(filter.variant, FilterVariant::InputAndDamping);
        assert!(filter.initial_tank > 0.0);
        assert!(fig3.scenario.external_input.is_empty()); // v = 0
        // Shared topology and delay seed with fig2.
        assert_eq!(fig2.scenario.seed, fig3.scenario.seed);
        assert_eq!(
            fig2.scenario.topology.edges.len(),
            fig3.scenario.topology.edges.len()
        );
    }

    #[test]
    fn zero_delay_presets_have_no_delay() {
        for name in ["nofilter-zerodelay", "filter-zerodelay"] {
            let file = by_name(name).unwrap();
            let resolved = file.scenario.resolve().unwrap();
            assert!(resolved.topology.edges.iter().all(|e| e.delay == 0.0));
        }
    }
}

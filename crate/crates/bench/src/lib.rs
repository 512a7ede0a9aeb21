//! Shared scenario builders for the benchmarks.

use tanksim_core::delay::DirectedEdge;
use tanksim_core::{
    DelaySampling, FilterConfig, FilterVariant, InitialLayout, RobotParams, Scenario, Topology,
    Vec2,
};

/// Six robots on a braced hexagon with randomized delays, mirroring the
/// built-in presets at an arbitrary duration.
pub fn hexagon_scenario(duration: f64, filtered: bool) -> Scenario {
    let radius = 0.5f64;
    let diagonal = radius * 3.0f64.sqrt();
    let mut edges = Vec::new();
    let mut link = |i: usize, j: usize, d: f64| {
        edges.push(DirectedEdge { from: i, to: j, distance: d, delay: 0.0 });
        edges.push(DirectedEdge { from: j, to: i, distance: d, delay: 0.0 });
    };
    for i in 0..6 {
        link(i, (i + 1) % 6, radius);
    }
    link(0, 2, diagonal);
    link(2, 4, diagonal);
    link(4, 0, diagonal);
    let anchors = (0..6)
        .map(|i| {
            let a = std::f64::consts::PI / 3.0 * i as f64;
            Vec2::new(radius * a.cos(), radius * a.sin())
        })
        .collect();
    Scenario {
        topology: Topology { n_robots: 6, edges },
        robot: RobotParams { damping: 1.0 },
        initial: InitialLayout::Perturbed { anchors, noise: 0.25 },
        control_period: 0.033,
        physics_substeps: 1,
        duration,
        filter: filtered.then(|| FilterConfig {
            alpha: 0.2,
            kappa: 1.0,
            variant: FilterVariant::InputAndDamping,
            initial_tank: 0.02,
        }),
        delay_sampling: DelaySampling::Uniform { min: 0.0, max: 0.333 },
        external_input: vec![],
        nominal_gain: 4.0,
        seed: 42,
    }
}

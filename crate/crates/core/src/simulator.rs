//! Deterministic fixed-step closed-loop simulation: per robot, sense
//! delayed neighbor positions, compute the nominal formation input, apply
//! the passivation filter, integrate, broadcast, and log everything.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::delay::{DelayLine, Topology, TopologyError};
use crate::dynamics::{
    self, RobotParams, RobotState, StepError,
};
use crate::formation::{nominal_input, NeighborView};
use crate::passivation::{
    constraint_slack, filter_input, EnergyLedger, FilterConfig, InvalidFilterConfig,
};
use crate::Vec2;

/// How per-directed-edge delays are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DelaySampling {
    /// Use the delay values already present on the topology edges.
    Explicit,
    /// Draw each directed edge's delay uniformly from [min, max] using the
    /// scenario seed.
    Uniform { min: f64, max: f64 },
}

/// How initial robot states are chosen. Robots always start at rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum InitialLayout {
    /// Explicit per-robot states.
    Explicit { states: Vec<RobotState> },
    /// Anchor positions (e.g. the target shape) with a seeded uniform
    /// perturbation in [-noise, noise] on each coordinate.
    Perturbed { anchors: Vec<Vec2>, noise: f64 },
}

fn default_gain() -> f64 {
    1.0
}
fn default_substeps() -> u32 {
    1
}

/// Full description of one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub topology: Topology,
    pub robot: RobotParams,
    pub initial: InitialLayout,
    /// Control (and broadcast) period (s).
    pub control_period: f64,
    /// Physics integration substeps per control period.
    #[serde(default = "default_substeps")]
    pub physics_substeps: u32,
    pub duration: f64,
    /// Passivation filter; absent means the nominal input runs unfiltered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    pub delay_sampling: DelaySampling,
    /// Constant external input v per robot; empty means zero for all.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub external_input: Vec<Vec2>,
    /// Scalar multiplier on the nominal formation input.
    #[serde(default = "default_gain")]
    pub nominal_gain: f64,
    /// Seed for delay sampling and initial perturbations.
    pub seed: u64,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Filter(#[from] InvalidFilterConfig),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("non-finite state for robot {robot} at step {step}")]
    Diverged { robot: usize, step: usize },
    #[error("integration failed at step {step}: {source}")]
    Integration { step: usize, source: StepError },
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        self.topology.validate()?;
        if let Some(f) = &self.filter {
            f.validate()?;
        }
        if !(self.robot.damping > 0.0) {
            return Err(SimError::Invalid(format!(
                "damping must be strictly positive, got {}",
                self.robot.damping
            )));
        }
        if !(self.control_period > 0.0) {
            return Err(SimError::Invalid("control_period must be positive".into()));
        }
        if self.physics_substeps < 1 {
            return Err(SimError::Invalid("physics_substeps must be >= 1".into()));
        }
        if !(self.duration > 0.0) {
            return Err(SimError::Invalid("duration must be positive".into()));
        }
        if !(self.nominal_gain.is_finite()) {
            return Err(SimError::Invalid("nominal_gain must be finite".into()));
        }
        if let DelaySampling::Uniform { min, max } = self.delay_sampling {
            if !(min >= 0.0 && max >= min) {
                return Err(SimError::Invalid(format!(
                    "uniform delay range requires 0 <= min <= max, got [{min}, {max}]"
                )));
            }
        }
        let n = self.topology.n_robots;
        match &self.initial {
            InitialLayout::Explicit { states } if states.len() != n => {
                return Err(SimError::Invalid(format!(
                    "{} initial states for {} robots",
                    states.len(),
                    n
                )));
            }
            InitialLayout::Perturbed { anchors, noise } => {
                if anchors.len() != n {
                    return Err(SimError::Invalid(format!(
                        "{} anchors for {} robots",
                        anchors.len(),
                        n
                    )));
                }
                if *noise < 0.0 {
                    return Err(SimError::Invalid("noise must be nonnegative".into()));
                }
            }
            _ => {}
        }
        if !self.external_input.is_empty() && self.external_input.len() != n {
            return Err(SimError::Invalid(format!(
                "{} external inputs for {} robots",
                self.external_input.len(),
                n
            )));
        }
        Ok(())
    }

    /// Expands all seeded randomness: samples per-directed-edge delays and
    /// initial perturbations, returning a scenario with everything explicit.
    /// The result re-runs to the identical trace.
    pub fn resolve(&self) -> Result<Scenario, SimError> {
        self.validate()?;
        let mut out = self.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        if let DelaySampling::Uniform { min, max } = self.delay_sampling {
            for e in &mut out.topology.edges {
                e.delay = if max > min { rng.random_range(min..=max) } else { min };
            }
            out.delay_sampling = DelaySampling::Explicit;
        }
        if let InitialLayout::Perturbed { anchors, noise } = &self.initial {
            let states = anchors
                .iter()
                .map(|a| {
                    let dx = if *noise > 0.0 { rng.random_range(-noise..=*noise) } else { 0.0 };
                    let dy = if *noise > 0.0 { rng.random_range(-noise..=*noise) } else { 0.0 };
                    RobotState::at_rest(a + Vec2::new(dx, dy))
                })
                .collect();
            out.initial = InitialLayout::Explicit { states };
        }
        if out.external_input.is_empty() {
            out.external_input = vec![Vec2::zeros(); self.topology.n_robots];
        }
        Ok(out)
    }
}

/// Logged time series of one robot.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotSeries {
    pub position: Vec<Vec2>,
    pub velocity: Vec<Vec2>,
    /// Nominal input û (after gain).
    pub nominal: Vec<Vec2>,
    /// Filtered input ũ* (equal to û when no filter is configured).
    pub filtered: Vec<Vec2>,
    pub sigma: Vec<f64>,
    /// Tank energy h at the filter instant; None when no filter runs.
    pub tank: Option<Vec<f64>>,
    /// Constraint slack at the executed (ũ*, σ*); None when no filter runs.
    pub slack: Option<Vec<f64>>,
    /// Cumulative ∫ vᵀy dτ up to (not including) each step.
    pub supply_integral: Vec<f64>,
}

/// Full simulation log on the uniform control-period time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub times: Vec<f64>,
    pub robots: Vec<RobotSeries>,
    /// Unordered edges (i < j, desired distance) in column order.
    pub edges: Vec<(usize, usize, f64)>,
    /// edge_distances[e][k] = ‖z_i − z_j‖ at step k.
    pub edge_distances: Vec<Vec<f64>>,
    /// Initial tank energy when a filter was configured.
    pub initial_tank: Option<f64>,
}

impl Trace {
    pub fn n_steps(&self) -> usize {
        self.times.len()
    }
}

/// Control decision held over one control period.
#[derive(Debug, Clone, Copy)]
struct HeldInput {
    /// Filtered input ũ (zero-order held).
    filtered: Vec2,
    /// Damping coefficient σ, applied to the instantaneous velocity.
    sigma: f64,
    /// External input v (zero-order held).
    external: Vec2,
}

/// Energy moved during one integration step.
#[derive(Debug, Clone, Copy)]
struct EnergyFlows {
    /// ∫ (D + σ‖y‖²) dτ over the step.
    dissipated: f64,
    /// ∫ ũᵀy dτ over the step.
    injected: f64,
    /// ∫ vᵀy dτ over the step.
    supplied: f64,
}

/// One RK4 step of the state together with the three energy integrals, all
/// advanced with the same stages. The closed loop over the step is
/// ẋ = −(a + σ)x + ũ + v.
fn integrate_with_energy(
    params: &RobotParams,
    state: &RobotState,
    held: &HeldInput,
    dt: f64,
) -> Result<(RobotState, EnergyFlows), StepError> {
    if !state.is_finite()
        || !held.filtered.iter().all(|c| c.is_finite())
        || !held.sigma.is_finite()
    {
        return Err(StepError::NonFinite);
    }
    let a_eff = params.damping + held.sigma;
    let forcing = held.filtered + held.external;

    // Augmented derivative: (ż, ẋ, ∫D̃, ∫ũᵀy, ∫vᵀy).
    let deriv = |s: &RobotState| {
        (
            s.velocity,
            -a_eff * s.velocity + forcing,
            a_eff * s.velocity.norm_squared(),
            held.filtered.dot(&s.velocity),
            held.external.dot(&s.velocity),
        )
    };
    let advance = |k: &(Vec2, Vec2, f64, f64, f64), h: f64| RobotState {
        position: state.position + h * k.0,
        velocity: state.velocity + h * k.1,
    };

    let k1 = deriv(state);
    let k2 = deriv(&advance(&k1, 0.5 * dt));
    let k3 = deriv(&advance(&k2, 0.5 * dt));
    let k4 = deriv(&advance(&k3, dt));
    let w = dt / 6.0;

    let next = RobotState {
        position: state.position + w * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        velocity: state.velocity + w * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    };
    let flows = EnergyFlows {
        dissipated: w * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
        injected: w * (k1.3 + 2.0 * k2.3 + 2.0 * k3.3 + k4.3),
        supplied: w * (k1.4 + 2.0 * k2.4 + 2.0 * k3.4 + k4.4),
    };
    Ok((next, flows))
}

/// Runs the closed loop. Deterministic given the scenario seed.
pub fn run(scenario: &Scenario) -> Result<Trace, SimError> {
    let sc = scenario.resolve()?;
    let n = sc.topology.n_robots;
    let dt = sc.control_period;
    let steps = (sc.duration / dt).round().max(1.0) as usize;
    let sub_dt = dt / sc.physics_substeps as f64;

    let mut states: Vec<RobotState> = match &sc.initial {
        InitialLayout::Explicit { states } => states.clone(),
        InitialLayout::Perturbed { .. } => unreachable!("resolved above"),
    };
    let mut ledgers: Option<Vec<EnergyLedger>> = sc
        .filter
        .as_ref()
        .map(|f| vec![EnergyLedger::new(f.initial_tank); n]);

    // One delay line per directed edge, carrying the sender's position.
    let mut lines: Vec<DelayLine> = sc
        .topology
        .edges
        .iter()
        .map(|e| {
            let mut line = DelayLine::new(e.delay, dt);
            line.push(0.0, states[e.from].position).expect("first push");
            line
        })
        .collect();

    let undirected = sc.topology.undirected_edges();
    let mut trace = Trace {
        times: Vec::with_capacity(steps),
        robots: (0..n)
            .map(|_| RobotSeries {
                position: Vec::with_capacity(steps),
                velocity: Vec::with_capacity(steps),
                nominal: Vec::with_capacity(steps),
                filtered: Vec::with_capacity(steps),
                sigma: Vec::with_capacity(steps),
                tank: sc.filter.as_ref().map(|_| Vec::with_capacity(steps)),
                slack: sc.filter.as_ref().map(|_| Vec::with_capacity(steps)),
                supply_integral: Vec::with_capacity(steps),
            })
            .collect(),
        edges: undirected.clone(),
        edge_distances: vec![Vec::with_capacity(steps); undirected.len()],
        initial_tank: sc.filter.as_ref().map(|f| f.initial_tank),
    };

    let mut supply: Vec<f64> = vec![0.0; n];
    let mut held_inputs: Vec<HeldInput> =
        vec![HeldInput { filtered: Vec2::zeros(), sigma: 0.0, external: Vec2::zeros() }; n];

    for step in 0..steps {
        let t = step as f64 * dt;
        trace.times.push(t);
        for (e, &(i, j, _)) in undirected.iter().enumerate() {
            trace.edge_distances[e]
                .push((states[i].position - states[j].position).norm());
        }

        // Controls are computed for all robots from the committed state
        // before anything moves.
        for i in 0..n {
            let z_i = states[i].position;
            let views: Vec<NeighborView> = sc
                .topology
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.to == i)
                .map(|(idx, e)| NeighborView {
                    delayed_position: lines[idx].query(t).expect("seeded line"),
                    desired_distance: e.distance,
                })
                .collect();
            let u_hat = sc.nominal_gain * nominal_input(z_i, &views);
            let y = dynamics::output(&states[i]);
            let dissipation = dynamics::dissipation_power(&sc.robot, &states[i]);
            let v_i = sc.external_input[i];

            let series = &mut trace.robots[i];
            series.position.push(z_i);
            series.velocity.push(states[i].velocity);
            series.nominal.push(u_hat);
            series.supply_integral.push(supply[i]);

            let (u_exec, sigma) = if let Some(fc) = &sc.filter {
                let ledger = &ledgers.as_ref().unwrap()[i];
                let h = ledger.h;
                let sol = filter_input(fc, u_hat, y, dissipation, h);
                let slack = constraint_slack(dissipation, y, sol.input, sol.sigma, h, fc.alpha);
                series.tank.as_mut().unwrap().push(h);
                series.slack.as_mut().unwrap().push(slack);
                (sol.input, sol.sigma)
            } else {
                (u_hat, 0.0)
            };
            series.filtered.push(u_exec);
            series.sigma.push(sigma);

            held_inputs[i] = HeldInput { filtered: u_exec, sigma, external: v_i };
        }

        // ũ and v are zero-order held over the control period; σ acts as
        // held structural damping on the instantaneous velocity. The
        // ledger integrands advance with the same RK4 stages as the state,
        // so the energy identity H + h = H(0) + h0 + ∫vᵀy holds to
        // integrator accuracy instead of drifting at first order.
        for i in 0..n {
            for _ in 0..sc.physics_substeps {
                let (next, flows) =
                    integrate_with_energy(&sc.robot, &states[i], &held_inputs[i], sub_dt)
                        .map_err(|source| SimError::Integration { step, source })?;
                states[i] = next;
                if let Some(ledgers) = ledgers.as_mut() {
                    ledgers[i].accumulate(flows.dissipated, flows.injected);
                }
                supply[i] += flows.supplied;
            }
            if !states[i].is_finite() {
                return Err(SimError::Diverged { robot: i, step });
            }
        }

        // Broadcast the new positions, valid at the end of the step.
        let t_next = (step + 1) as f64 * dt;
        for (idx, e) in sc.topology.edges.iter().enumerate() {
            lines[idx]
                .push(t_next, states[e.from].position)
                .expect("monotone broadcast");
        }
    }

    Ok(trace)
}

/// Summary statistics extracted from a trace.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    /// (i, j, rms of ‖z_i − z_j‖ − d_ij over the final 20% of the run).
    pub edge_rms: Vec<(usize, usize, f64)>,
    /// (i, j, |‖z_i − z_j‖ − d_ij|) at the final logged step.
    pub edge_final_error: Vec<(usize, usize, f64)>,
    /// max over time and robots of ‖ũ* − û‖.
    pub max_input_deviation: f64,
    /// min over time and robots of the tank energy h.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_tank: Option<f64>,
    /// max over time and robots of H(t) − H(0) − h0 − ∫vᵀy dτ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_margin: Option<f64>,
    /// max over time and robots of |H(t) + h(t) − H(0) − h0 − ∫vᵀy dτ|.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_residual_max: Option<f64>,
}

/// Computes the summary statistics behind the edge-distance, tank, and
/// input-deviation plots, plus the dissipativity certificate margin.
pub fn metrics(trace: &Trace) -> Metrics {
    let steps = trace.n_steps();
    assert!(steps > 0, "metrics on empty trace");
    let window_start = steps - (steps / 5).max(1);

    let edge_rms = trace
        .edges
        .iter()
        .zip(&trace.edge_distances)
        .map(|(&(i, j, d), dists)| {
            let window = &dists[window_start..];
            let ms = window.iter().map(|x| (x - d) * (x - d)).sum::<f64>()
                / window.len() as f64;
            (i, j, ms.sqrt())
        })
        .collect();
    let edge_final_error = trace
        .edges
        .iter()
        .zip(&trace.edge_distances)
        .map(|(&(i, j, d), dists)| (i, j, (dists[steps - 1] - d).abs()))
        .collect();

    let max_input_deviation = trace
        .robots
        .iter()
        .flat_map(|r| r.nominal.iter().zip(&r.filtered))
        .map(|(u_hat, u)| (u - u_hat).norm())
        .fold(0.0, f64::max);

    let min_tank = trace.initial_tank.map(|_| {
        trace
            .robots
            .iter()
            .flat_map(|r| r.tank.as_ref().unwrap().iter().copied())
            .fold(f64::INFINITY, f64::min)
    });

    let (certificate_margin, energy_residual_max) = match trace.initial_tank {
        None => (None, None),
        Some(h0) => {
            let mut margin = f64::NEG_INFINITY;
            let mut residual = 0.0f64;
            for r in &trace.robots {
                let h_series = r.tank.as_ref().unwrap();
                let h_initial = 0.5 * r.velocity[0].norm_squared();
                for k in 0..steps {
                    let h_now = 0.5 * r.velocity[k].norm_squared();
                    let budget = h_initial + h0 + r.supply_integral[k];
                    margin = margin.max(h_now - budget);
                    // Bookkeeping identity: H(t) + h(t) = H(0) + h0 + ∫vᵀy.
                    residual = residual.max((h_now + h_series[k] - budget).abs());
                }
            }
            (Some(margin), Some(residual))
        }
    };

    Metrics {
        edge_rms,
        edge_final_error,
        max_input_deviation,
        min_tank,
        certificate_margin,
        energy_residual_max,
    }
}

//! Damped double-integrator robot model in port-Hamiltonian form.
//!
//! The model is `z̈ = -a ż + u` with state `(z, x)`, `x = ż`. Written as an
//! input-state-output port-Hamiltonian system it has Hamiltonian
//! `H(x) = ½‖x‖²`, vanishing structure matrix, resistive structure `aI`,
//! identity input map, and output `y = x`.

use serde::{Deserialize, Serialize};

use crate::Vec2;

/// Physical parameters of one robot.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RobotParams {
    /// Velocity damping coefficient, strictly positive (1/s).
    pub damping: f64,
}

impl RobotParams {
    pub fn new(damping: f64) -> Result<Self, InvalidParams> {
        if !(damping > 0.0) || !damping.is_finite() {
            return Err(InvalidParams { damping });
        }
        Ok(Self { damping })
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("damping must be strictly positive and finite, got {damping}")]
pub struct InvalidParams {
    pub damping: f64,
}

/// Position and velocity of one robot (the port-Hamiltonian state).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    /// Position z (m).
    pub position: Vec2,
    /// Velocity x = ż (m/s).
    pub velocity: Vec2,
}

impl RobotState {
    pub fn new(position: Vec2, velocity: Vec2) -> Self {
        Self { position, velocity }
    }

    pub fn at_rest(position: Vec2) -> Self {
        Self {
            position,
            velocity: Vec2::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|c| c.is_finite())
    }
}

/// Stored energy H(x) = ½‖x‖².
pub fn hamiltonian(state: &RobotState) -> f64 {
    0.5 * state.velocity.norm_squared()
}

/// Port output y = x (identity input map, quadratic Hamiltonian).
pub fn output(state: &RobotState) -> Vec2 {
    state.velocity
}

/// Instantaneous dissipation power D(x) = a‖x‖² ≥ 0.
pub fn dissipation_power(params: &RobotParams, state: &RobotState) -> f64 {
    params.damping * state.velocity.norm_squared()
}

/// Right-hand side of the robot dynamics: (ż, ẋ) = (x, -a x + u).
pub fn state_derivative(params: &RobotParams, state: &RobotState, input: Vec2) -> (Vec2, Vec2) {
    (
        state.velocity,
        -params.damping * state.velocity + input,
    )
}

/// One classical fourth-order step with the input held constant (zero-order
/// hold). Local error O(dt⁵).
pub fn integrate_step(
    params: &RobotParams,
    state: &RobotState,
    input: Vec2,
    dt: f64,
) -> Result<RobotState, StepError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(StepError::BadDt(dt));
    }
    if !state.is_finite() || !input.iter().all(|c| c.is_finite()) {
        return Err(StepError::NonFinite);
    }

    let eval = |s: &RobotState| state_derivative(params, s, input);
    let advance = |s: &RobotState, k: &(Vec2, Vec2), h: f64| RobotState {
        position: s.position + h * k.0,
        velocity: s.velocity + h * k.1,
    };

    let k1 = eval(state);
    let k2 = eval(&advance(state, &k1, 0.5 * dt));
    let k3 = eval(&advance(state, &k2, 0.5 * dt));
    let k4 = eval(&advance(state, &k3, dt));

    Ok(RobotState {
        position: state.position
            + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        velocity: state.velocity
            + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    })
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum StepError {
    #[error("integration step must be positive and finite, got {0}")]
    BadDt(f64),
    #[error("non-finite state or input")]
    NonFinite,
}

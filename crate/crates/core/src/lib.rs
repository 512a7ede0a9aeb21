//! Dissipativity-preserving control for multi-robot formations over
//! delayed communication links.
//!
//! The crate provides:
//! - a damped double-integrator robot model in port-Hamiltonian form
//!   ([`dynamics`]),
//! - formation graphs with per-directed-edge delays and interpolating
//!   sample buffers ([`delay`]),
//! - the weighted-consensus formation controller ([`formation`]),
//! - the energy-ledger CBF and the closed-form minimally invasive
//!   passivation filter ([`passivation`]),
//! - a deterministic fixed-step closed-loop simulator with trace logging
//!   and metric extraction ([`simulator`]).

pub mod delay;
pub mod dynamics;
pub mod formation;
pub mod passivation;
pub mod simulator;

pub use delay::{DelayLine, DirectedEdge, Topology, TopologyError};
pub use dynamics::{RobotParams, RobotState};
pub use formation::NeighborView;
pub use passivation::{EnergyLedger, FilterConfig, FilterSolution, FilterVariant};
pub use simulator::{
    DelaySampling, InitialLayout, Metrics, Scenario, SimError, Trace,
};

/// Planar vector used for positions, velocities, and inputs.
pub type Vec2 = nalgebra::Vector2<f64>;

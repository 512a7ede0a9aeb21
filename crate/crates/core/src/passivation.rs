//! Energy-ledger CBF and the closed-form minimally invasive passivation
//! filter.
//!
//! Each robot keeps a ledger h of the energy it has dissipated minus the
//! energy its filtered input has injected, plus an initial budget h0. The
//! filter solves, in closed form,
//!
//! ```text
//!   min ‖ũ − û‖²  (+ κσ² in the damping variant)
//!   s.t. D + σ‖y‖² − yᵀũ + γ(h) ≥ 0,
//! ```
//!
//! returning û untouched whenever û is already feasible. With the filtered
//! input applied every control step, h ≥ 0 stays forward invariant up to
//! discretization error, which certifies dissipativity of the closed loop.

use serde::{Deserialize, Serialize};

use crate::Vec2;

/// Which decision variables the filter optimizes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterVariant {
    /// Modify the input only.
    InputOnly,
    /// Modify the input and add a damping coefficient σ, trading the two
    /// through the weight κ.
    InputAndDamping,
}

/// Filter parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Ledger discharge-rate gain α of the class-K function γ(s) = αs (1/s).
    pub alpha: f64,
    /// Damping cost weight κ (only used by the damping variant).
    pub kappa: f64,
    pub variant: FilterVariant,
    /// Initial tank energy h(t₀) ≥ 0.
    pub initial_tank: f64,
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), InvalidFilterConfig> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(InvalidFilterConfig::Alpha(self.alpha));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(InvalidFilterConfig::Kappa(self.kappa));
        }
        if self.initial_tank < 0.0 || !self.initial_tank.is_finite() {
            return Err(InvalidFilterConfig::InitialTank(self.initial_tank));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum InvalidFilterConfig {
    #[error("alpha must be strictly positive, got {0}")]
    Alpha(f64),
    #[error("kappa must be strictly positive, got {0}")]
    Kappa(f64),
    #[error("initial tank energy must be nonnegative, got {0}")]
    InitialTank(f64),
}

/// Output of one filter evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSolution {
    /// Minimally modified input ũ*.
    pub input: Vec2,
    /// Damping coefficient σ* ≥ 0 (zero in the input-only variant).
    pub sigma: f64,
    /// Whether the constraint was binding at the solution.
    pub active: bool,
    /// Set when ‖y‖ = 0 with negative slack: no choice of (ũ, σ) can change
    /// ḣ, so û is passed through and the class-K term must recover h ≥ 0.
    pub infeasible: bool,
}

/// Extended class-K function γ(s) = αs.
pub fn gamma(alpha: f64, h: f64) -> f64 {
    alpha * h
}

/// Left-hand side of the dissipativity constraint:
/// D + σ‖y‖² − yᵀũ + γ(h).
pub fn constraint_slack(
    dissipation: f64,
    y: Vec2,
    input: Vec2,
    sigma: f64,
    h: f64,
    alpha: f64,
) -> f64 {
    dissipation + sigma * y.norm_squared() - y.dot(&input) + gamma(alpha, h)
}

/// Closed-form solution of the passivation QP.
///
/// With b = D + αh and s₀ = b − yᵀû: if s₀ ≥ 0 the nominal input is
/// feasible and returned bit-identically. Otherwise the single affine
/// constraint is active and the KKT multiplier is
/// μ = 2(yᵀû − b)/‖y‖² (input-only) or
/// μ = 2(yᵀû − b)/(‖y‖² + ‖y‖⁴/κ) (damping variant), giving
/// ũ* = û − (μ/2)y and σ* = μ‖y‖²/(2κ).
pub fn filter_input(
    config: &FilterConfig,
    nominal: Vec2,
    y: Vec2,
    dissipation: f64,
    h: f64,
) -> FilterSolution {
    let b = dissipation + gamma(config.alpha, h);
    let y_sq = y.norm_squared();
    let slack_at_nominal = b - y.dot(&nominal);

    if slack_at_nominal >= 0.0 {
        return FilterSolution { input: nominal, sigma: 0.0, active: false, infeasible: false };
    }
    if y_sq == 0.0 {
        return FilterSolution { input: nominal, sigma: 0.0, active: false, infeasible: true };
    }

    let violation = -slack_at_nominal; // yᵀû − b > 0
    match config.variant {
        FilterVariant::InputOnly => {
            let mu = 2.0 * violation / y_sq;
            FilterSolution {
                input: nominal - (mu / 2.0) * y,
                sigma: 0.0,
                active: true,
                infeasible: false,
            }
        }
        FilterVariant::InputAndDamping => {
            let mu = 2.0 * violation / (y_sq + y_sq * y_sq / config.kappa);
            FilterSolution {
                input: nominal - (mu / 2.0) * y,
                sigma: mu * y_sq / (2.0 * config.kappa),
                active: true,
                infeasible: false,
            }
        }
    }
}

/// Accumulated CBF value h and its bookkeeping integrals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyLedger {
    /// Current tank energy h = h0 + dissipated − injected.
    pub h: f64,
    /// Initial tank energy h(t₀).
    pub h0: f64,
    /// Accumulated ∫ D̃ dτ, D̃ = D + σ‖y‖².
    pub dissipated: f64,
    /// Accumulated ∫ ũᵀy dτ.
    pub injected: f64,
}

impl EnergyLedger {
    pub fn new(h0: f64) -> Self {
        assert!(h0 >= 0.0, "initial tank energy must be nonnegative");
        Self { h: h0, h0, dissipated: 0.0, injected: 0.0 }
    }

    /// Forward-Euler accumulation of one control period, using the values
    /// of D, σ, y, ũ at the instant the filter ran. The bookkeeping
    /// identity h = h0 + dissipated − injected holds exactly.
    pub fn update(&mut self, dissipation: f64, sigma: f64, y: Vec2, input: Vec2, dt: f64) {
        assert!(dt > 0.0);
        self.accumulate(dt * (dissipation + sigma * y.norm_squared()), dt * input.dot(&y));
    }

    /// Adds precomputed energy increments (e.g. quadrature over a physics
    /// step) to the two integrals.
    pub fn accumulate(&mut self, dissipated: f64, injected: f64) {
        self.dissipated += dissipated;
        self.injected += injected;
        self.h = self.h0 + self.dissipated - self.injected;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn cfg(variant: FilterVariant) -> FilterConfig {
        FilterConfig { alpha: 1.0, kappa: 1.0, variant, initial_tank: 1.0 }
    }

    #[test]
    fn gamma_is_linear_and_extended() {
        assert_eq!(gamma(1.0, 0.0), 0.0);
        assert_eq!(gamma(2.0, 1.5), 3.0);
        assert_eq!(gamma(1.0, -0.5), -0.5);
    }

    #[test]
    fn slack_values() {
        assert_eq!(constraint_slack(0.5, v(0.0, 1.0), v(1.0, 0.0), 0.0, 1.0, 1.0), 1.5);
        assert_eq!(constraint_slack(0.0, v(1.0, 0.0), v(2.0, 0.0), 0.0, 0.0, 1.0), -2.0);
        assert_eq!(constraint_slack(0.0, v(1.0, 0.0), v(1.0, 0.0), 1.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn feasible_nominal_passes_through_bit_identically() {
        let sol = filter_input(&cfg(FilterVariant::InputOnly), v(1.0, 0.0), v(0.0, 1.0), 0.5, 1.0);
        assert_eq!(sol.input, v(1.0, 0.0));
        assert_eq!(sol.sigma, 0.0);
        assert!(!sol.active && !sol.infeasible);
    }

    #[test]
    fn input_only_active_case() {
        // KKT by hand: û = (2,0), y = (1,0), b = 0 → ũ* = (0,0).
        let sol = filter_input(&cfg(FilterVariant::InputOnly), v(2.0, 0.0), v(1.0, 0.0), 0.0, 0.0);
        assert_eq!(sol.input, v(0.0, 0.0));
        assert_eq!(sol.sigma, 0.0);
        assert!(sol.active);
        let slack = constraint_slack(0.0, v(1.0, 0.0), sol.input, sol.sigma, 0.0, 1.0);
        assert!(slack.abs() < 1e-15);
    }

    #[test]
    fn damping_variant_active_case() {
        // Same data with κ = 1: ũ* = (1,0), σ* = 1, slack exactly zero.
        let sol = filter_input(&cfg(FilterVariant::InputAndDamping), v(2.0, 0.0), v(1.0, 0.0), 0.0, 0.0);
        assert_relative_eq!(sol.input.x, 1.0, epsilon = 1e-15);
        assert_eq!(sol.input.y, 0.0);
        assert_relative_eq!(sol.sigma, 1.0, epsilon = 1e-15);
        let slack = constraint_slack(0.0, v(1.0, 0.0), sol.input, sol.sigma, 0.0, 1.0);
        assert!(slack.abs() < 1e-15);
    }

    #[test]
    fn zero_output_decouples() {
        let sol = filter_input(&cfg(FilterVariant::InputAndDamping), v(5.0, -3.0), v(0.0, 0.0), 0.0, 2.0);
        assert_eq!(sol.input, v(5.0, -3.0));
        assert_eq!(sol.sigma, 0.0);
        assert!(!sol.infeasible);
    }

    #[test]
    fn zero_output_negative_tank_flags_infeasible() {
        // ‖y‖ = 0 and b < 0: ḣ is out of the filter's hands.
        let sol = filter_input(&cfg(FilterVariant::InputOnly), v(1.0, 0.0), v(0.0, 0.0), 0.0, -0.5);
        assert_eq!(sol.input, v(1.0, 0.0));
        assert!(sol.infeasible);
        assert!(!sol.active);
    }

    #[test]
    fn ledger_accumulation() {
        let mut ledger = EnergyLedger::new(1.0);
        ledger.update(0.5, 0.0, v(1.0, 0.0), v(0.2, 0.0), 0.1);
        assert_relative_eq!(ledger.h, 1.03, epsilon = 1e-15);
        assert_relative_eq!(ledger.h, ledger.h0 + ledger.dissipated - ledger.injected);
    }

    #[test]
    fn lossless_balance_leaves_h_unchanged() {
        let mut ledger = EnergyLedger::new(0.7);
        // D = ũᵀy = 0.5.
        ledger.update(0.5, 0.0, v(1.0, 0.0), v(0.5, 0.0), 0.25);
        assert_relative_eq!(ledger.h, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn ledger_records_violations_honestly() {
        let mut ledger = EnergyLedger::new(0.0);
        ledger.update(0.0, 0.0, v(1.0, 0.0), v(1.0, 0.0), 0.1);
        assert_relative_eq!(ledger.h, -0.1, epsilon = 1e-15);
    }

    #[test]
    fn monotone_in_tank() {
        // Larger h never increases the input modification.
        let c = cfg(FilterVariant::InputAndDamping);
        let nominal = v(1.8, -0.6);
        let y = v(0.9, 0.4);
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let h = -0.5 + 0.2 * k as f64;
            let sol = filter_input(&c, nominal, y, 0.1, h);
            let mod_norm = (sol.input - nominal).norm();
            assert!(mod_norm <= prev + 1e-12);
            prev = mod_norm;
        }
    }
}

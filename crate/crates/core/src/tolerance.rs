//! Numerical tolerance ladder shared by every solver in the crate.

use serde::{Deserialize, Serialize};

/// Environment variable that scales every tolerance by a common factor.
pub const TOL_SCALE_ENV: &str = "EVIKIT_TOL_SCALE";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Primal feasibility (relative to row scale).
    pub feas: f64,
    /// Primal/dual objective agreement.
    pub gap: f64,
    /// Projection KKT residual.
    pub proj: f64,
    /// Fixed-point residual `|Kx + c - x|_inf`.
    pub fixed_point: f64,
    /// Smallest pivot magnitude the simplex accepts.
    pub pivot: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            feas: 1e-9,
            gap: 1e-8,
            proj: 1e-7,
            fixed_point: 1e-7,
            pivot: 1e-10,
            optimality: 1e-10,
        }
    }
}

impl ToleranceConfig {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            feas: self.feas * factor,
            gap: self.gap * factor,
            proj: self.proj * factor,
            fixed_point: self.fixed_point * factor,
            pivot: self.pivot * factor,
            optimality: self.optimality * factor,
        }
    }

    /// Defaults, scaled by `EVIKIT_TOL_SCALE` when it is set to a positive number.
    pub fn from_env() -> Self {
        let base = Self::default();
        match std::env::var(TOL_SCALE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
        {
            Some(f) if f.is_finite() && f > 0.0 => base.scaled(f),
            _ => base,
        }
    }

    /// Feasibility, gap and optimality thresholds a hundred times smaller;
    /// the pivot threshold is kept, since smaller pivots are less stable.
    pub fn tightened(&self) -> Self {
        Self { pivot: self.pivot, ..self.scaled(1e-2) }
    }
}

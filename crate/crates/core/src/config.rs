use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric policy shared by every check: how "for all t" and "for all s"
/// are discretized and how much slack an inequality gets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// Absolute slack for pointwise inequality checks.
    pub eps_ineq: f64,
    /// Points per operand support grid (and per combination result grid).
    pub grid_size: usize,
    /// Lower truncation quantile for unbounded supports.
    pub trunc_lo: f64,
    /// Upper truncation quantile for unbounded supports.
    pub trunc_hi: f64,
    /// Transform-domain evaluation points, strictly increasing and positive.
    pub s_grid: Vec<f64>,
    /// Highest derivative order used by the complete-monotonicity test.
    pub max_deriv_order: u32,
    /// Highest moment compared by the moment order.
    pub moment_horizon: u32,
    /// Initial relative step for finite-difference derivatives.
    pub fd_step: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eps_ineq: 1e-6,
            grid_size: 2048,
            trunc_lo: 1e-9,
            trunc_hi: 1.0 - 1e-9,
            s_grid: log_grid(1e-3, 1e3, 64),
            max_deriv_order: 8,
            moment_horizon: 10,
            fd_step: 0.05,
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_ineq > 0.0) {
            return Err(Error::param("eps_ineq", "must be positive"));
        }
        if self.grid_size < 16 {
            return Err(Error::param("grid_size", "must be at least 16"));
        }
        if !(self.trunc_lo > 0.0 && self.trunc_lo < self.trunc_hi && self.trunc_hi < 1.0) {
            return Err(Error::param(
                "trunc_lo/trunc_hi",
                "need 0 < trunc_lo < trunc_hi < 1",
            ));
        }
        if self.s_grid.is_empty()
            || self.s_grid[0] <= 0.0
            || self.s_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::param(
                "s_grid",
                "must be nonempty, positive and strictly increasing",
            ));
        }
        if self.moment_horizon == 0 {
            return Err(Error::param("moment_horizon", "must be positive"));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::param("fd_step", "must be positive"));
        }
        Ok(())
    }

    /// Same policy with every grid refined by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        ToleranceConfig {
            grid_size: self.grid_size * factor,
            ..self.clone()
        }
    }
}

use super::{merged_grid, OrderChecker, OrderKind};
use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::Result;
use crate::quadrature::{gauss_legendre5, integrate_with_breaks, Tolerance};
use crate::verdict::{Location, MarginTracker, OrderVerdict, Witness};

/// `X ≤_icx Y` iff the stop-loss transform `π(x) = ∫_x^∞ (1 - F(t)) dt` of
/// `X` is dominated by that of `Y` everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct IcxChecker;

const LABEL: &str = "stop-loss of X <= stop-loss of Y on merged grid";

/// `π(t_i)` at sorted points by backward cumulative quadrature from the
/// last point, where the remaining tail is taken as zero.
pub fn stop_loss_profile(d: &Distribution, points: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut out = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        out[i] = out[i + 1] + gauss_legendre5(|t| d.survival(t), points[i], points[i + 1]);
    }
    out
}

/// `π(t)` by adaptive quadrature up to `hi`.
fn stop_loss_direct(d: &Distribution, t: f64, hi: f64) -> f64 {
    if hi <= t {
        return 0.0;
    }
    let breaks = d.breakpoints_within(t, hi);
    integrate_with_breaks(|u| d.survival(u), &breaks, Tolerance::default()).value
}

impl OrderChecker for IcxChecker {
    fn kind(&self) -> OrderKind {
        OrderKind::Icx
    }

    fn check(&self, x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
        let pts = merged_grid(x, y, cfg);
        let (px, py) = (stop_loss_profile(x, &pts), stop_loss_profile(y, &pts));
        let mut tracker = MarginTracker::new();
        for ((&t, &a), &b) in pts.iter().zip(&px).zip(&py) {
            tracker.observe_slack(Location::Point(t), a, b, b - a, 0.0);
        }
        Ok(tracker.verdict(cfg.eps_ineq, LABEL))
    }

    fn reverify(&self, x: &Distribution, y: &Distribution, w: &Witness, cfg: &ToleranceConfig) -> Result<bool> {
        let Location::Point(t) = w.location else {
            return Ok(false);
        };
        let hi = merged_grid(x, y, cfg).last().copied().unwrap_or(t);
        Ok(stop_loss_direct(x, t, hi) - stop_loss_direct(y, t, hi) > cfg.eps_ineq)
    }
}

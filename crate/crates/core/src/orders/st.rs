use super::{merged_grid, OrderChecker, OrderKind};
use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::Result;
use crate::verdict::{Location, MarginTracker, OrderVerdict, Witness};

/// `X ≤_st Y` iff `F_X(t) >= F_Y(t)` for all `t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StChecker;

impl OrderChecker for StChecker {
    fn kind(&self) -> OrderKind {
        OrderKind::St
    }

    fn check(&self, x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
        let mut tracker = MarginTracker::new();
        for t in merged_grid(x, y, cfg) {
            tracker.observe(Location::Point(t), x.cdf(t), y.cdf(t));
        }
        Ok(tracker.verdict(cfg.eps_ineq, "F_X >= F_Y on merged grid"))
    }

    fn reverify(&self, x: &Distribution, y: &Distribution, w: &Witness, cfg: &ToleranceConfig) -> Result<bool> {
        let Location::Point(t) = w.location else {
            return Ok(false);
        };
        Ok(y.cdf(t) - x.cdf(t) > cfg.eps_ineq)
    }
}

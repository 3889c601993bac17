use super::{OrderChecker, OrderKind};
use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::Result;
use crate::transform::laplace_nonnegative;
use crate::verdict::{Location, MarginTracker, OrderVerdict, Witness};

/// `X ≤_Lt Y` iff `L_X(s) >= L_Y(s)` for all `s > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LtChecker;

impl OrderChecker for LtChecker {
    fn kind(&self) -> OrderKind {
        OrderKind::Lt
    }

    fn check(&self, x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
        let (lx, ly) = (laplace_nonnegative(x, cfg)?, laplace_nonnegative(y, cfg)?);
        let mut tracker = MarginTracker::new();
        for &s in &cfg.s_grid {
            let (a, ea) = lx.eval_with_error(s);
            let (b, eb) = ly.eval_with_error(s);
            tracker.observe_with_error(Location::Transform(s), a, b, ea + eb);
        }
        let label = format!("L_X >= L_Y on {}-point s-grid", cfg.s_grid.len());
        Ok(tracker.verdict(cfg.eps_ineq, &label))
    }

    fn reverify(&self, x: &Distribution, y: &Distribution, w: &Witness, cfg: &ToleranceConfig) -> Result<bool> {
        let Location::Transform(s) = w.location else {
            return Ok(false);
        };
        let (a, ea) = laplace_nonnegative(x, cfg)?.eval_with_error(s);
        let (b, eb) = laplace_nonnegative(y, cfg)?.eval_with_error(s);
        Ok(b - a > cfg.eps_ineq + ea + eb)
    }
}

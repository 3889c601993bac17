use super::{OrderChecker, OrderKind};
use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::Result;
use crate::verdict::{Location, MarginTracker, OrderVerdict, Witness};

/// `X ≤_m Y` iff `E[X^m] <= E[Y^m]` for every `m`, checked up to the
/// configured horizon with a relative tolerance.
#[derive(Debug, Clone, Copy, Default)]
pub struct MomentChecker;

fn relative_slack(ex: f64, ey: f64) -> f64 {
    (ey - ex) / ey.abs().max(f64::MIN_POSITIVE)
}

impl OrderChecker for MomentChecker {
    fn kind(&self) -> OrderKind {
        OrderKind::Moment
    }

    fn check(&self, x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
        let mut tracker = MarginTracker::new();
        for m in 1..=cfg.moment_horizon {
            let (ex, ey) = (x.moment(m)?, y.moment(m)?);
            let slack = if ex == ey { 0.0 } else { relative_slack(ex, ey) };
            tracker.observe_slack(Location::Moment(m), ex, ey, slack, 0.0);
        }
        let label = format!("E[X^m] <= E[Y^m] up to horizon {}", cfg.moment_horizon);
        Ok(tracker.verdict(cfg.eps_ineq, &label))
    }

    fn reverify(&self, x: &Distribution, y: &Distribution, w: &Witness, cfg: &ToleranceConfig) -> Result<bool> {
        let Location::Moment(m) = w.location else {
            return Ok(false);
        };
        let (ex, ey) = (x.moment(m)?, y.moment(m)?);
        Ok(ex > ey + cfg.eps_ineq * ey.abs())
    }
}

use super::{merged_grid, OrderChecker, OrderKind};
use crate::config::ToleranceConfig;
use crate::distribution::{Density, Distribution};
use crate::error::Result;
use crate::verdict::{Location, MarginTracker, OrderVerdict, Witness};

/// `X ≤_hr Y` iff `r_X(t) >= r_Y(t)` wherever both hazards are defined.
/// Only absolutely continuous laws are compared pointwise; identical laws
/// are related whatever their atoms, since `S_Y / S_X` is then constant.
#[derive(Debug, Clone, Copy, Default)]
pub struct HrChecker;

const LABEL: &str = "r_X >= r_Y where both hazards are defined";

/// Absolute evaluation error of `(survival, density)` at `t`.
fn evaluation_error(d: &Distribution, t: f64) -> (f64, f64) {
    match d {
        Distribution::Grid(g) => {
            let (ce, de) = g.interpolation_error(t);
            // truncated operands leave up to this much mass unaccounted for
            (2e-9 + ce, de)
        }
        Distribution::Mixture(cs) => cs.iter().fold((0.0, 0.0), |acc, (w, c)| {
            let (a, b) = evaluation_error(c, t);
            (acc.0 + w * a, acc.1 + w * b)
        }),
        Distribution::Affine { base, scale, shift } => {
            let (a, b) = evaluation_error(base, (t - shift) / scale);
            (a, b / scale.abs())
        }
        _ => (1e-15, 1e-15 * d.continuous_pdf(t)),
    }
}

/// Hazard and its error bound, or `None` where undefined.
fn hazard_estimate(d: &Distribution, t: f64, floor: f64) -> Option<(f64, f64)> {
    let surv = d.survival(t);
    if surv <= floor {
        return None;
    }
    let f = match d.pdf(t) {
        Ok(Density::Value(f)) if f.is_finite() => f,
        _ => return None,
    };
    let (se, fe) = evaluation_error(d, t);
    let r = f / surv;
    Some((r, fe / surv + r * se / surv))
}

impl OrderChecker for HrChecker {
    fn kind(&self) -> OrderKind {
        OrderKind::Hr
    }

    fn check(&self, x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
        if x == y {
            return Ok(OrderVerdict::holds(0.0, LABEL));
        }
        if !(x.is_absolutely_continuous() && y.is_absolutely_continuous()) {
            return Ok(OrderVerdict::inconclusive(
                "atoms block hazard evaluation",
                LABEL,
            ));
        }
        let floor = cfg.eps_ineq;
        let mut tracker = MarginTracker::new();
        for t in merged_grid(x, y, cfg) {
            if let (Some((rx, ex)), Some((ry, ey))) =
                (hazard_estimate(x, t, floor), hazard_estimate(y, t, floor))
            {
                tracker.observe_with_error(Location::Point(t), rx, ry, ex + ey);
            }
        }
        if tracker.count == 0 {
            return Ok(OrderVerdict::inconclusive(
                "no point where both hazards are defined",
                LABEL,
            ));
        }
        Ok(tracker.verdict(cfg.eps_ineq, LABEL))
    }

    fn reverify(&self, x: &Distribution, y: &Distribution, w: &Witness, cfg: &ToleranceConfig) -> Result<bool> {
        let Location::Point(t) = w.location else {
            return Ok(false);
        };
        let floor = cfg.eps_ineq;
        Ok(match (hazard_estimate(x, t, floor), hazard_estimate(y, t, floor)) {
            (Some((rx, ex)), Some((ry, ey))) => ry - rx > cfg.eps_ineq + ex + ey,
            _ => false,
        })
    }
}

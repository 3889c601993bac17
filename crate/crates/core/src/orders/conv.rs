use super::{OrderChecker, OrderKind};
use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::Result;
use crate::transform::{complete_monotonicity_check, phi_ratio};
use crate::verdict::{Location, OrderVerdict, Witness};

/// `X ≤_conv Y` iff `L_Y / L_X` is completely monotone, checked up to a
/// finite derivative order.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConvChecker;

impl OrderChecker for ConvChecker {
    fn kind(&self) -> OrderKind {
        OrderKind::Conv
    }

    fn check(&self, x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
        let phi = phi_ratio(x, y, cfg)?;
        Ok(complete_monotonicity_check(&phi, cfg))
    }

    fn reverify(&self, x: &Distribution, y: &Distribution, w: &Witness, cfg: &ToleranceConfig) -> Result<bool> {
        let Location::Derivative { n, s } = w.location else {
            return Ok(false);
        };
        let phi = phi_ratio(x, y, cfg)?;
        let est = phi.derivative(n).eval(s)?;
        let signed = if n % 2 == 0 { est.value } else { -est.value };
        Ok(-signed > cfg.eps_ineq + est.error)
    }
}

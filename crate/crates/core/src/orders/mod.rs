//! Decision procedures for the six orders, behind a common trait and a
//! registry keyed by name.

mod conv;
mod hr;
mod icx;
mod lt;
mod moment;
mod st;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::verdict::{OrderVerdict, Witness};

pub use conv::ConvChecker;
pub use hr::HrChecker;
pub use icx::{stop_loss_profile, IcxChecker};
pub use lt::LtChecker;
pub use moment::MomentChecker;
pub use st::StChecker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OrderKind {
    #[serde(rename = "ST")]
    St,
    #[serde(rename = "HR")]
    Hr,
    #[serde(rename = "MOMENT")]
    Moment,
    #[serde(rename = "LT")]
    Lt,
    #[serde(rename = "CONV")]
    Conv,
    #[serde(rename = "ICX")]
    Icx,
}

impl OrderKind {
    pub const ALL: [OrderKind; 6] = [
        OrderKind::St,
        OrderKind::Hr,
        OrderKind::Moment,
        OrderKind::Lt,
        OrderKind::Conv,
        OrderKind::Icx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OrderKind::St => "st",
            OrderKind::Hr => "hr",
            OrderKind::Moment => "moment",
            OrderKind::Lt => "lt",
            OrderKind::Conv => "conv",
            OrderKind::Icx => "icx",
        }
    }

    /// MOMENT, LT and CONV are only defined for nonnegative variables.
    pub fn requires_nonnegative(self) -> bool {
        matches!(self, OrderKind::Moment | OrderKind::Lt | OrderKind::Conv)
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

impl<'de> serde::Deserialize<'de> for OrderKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for OrderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OrderKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                what: "order",
                name: s.to_string(),
            })
    }
}

/// One stochastic order `X ≤ Y`.
pub trait OrderChecker: Send + Sync {
    fn kind(&self) -> OrderKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    fn requires_nonnegative(&self) -> bool {
        self.kind().requires_nonnegative()
    }

    /// Raw decision; see [`decide`] for the re-verified form.
    fn check(&self, x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict>;

    /// Re-evaluates both sides at the witness location and reports whether
    /// the violation is still beyond tolerance.
    fn reverify(&self, x: &Distribution, y: &Distribution, w: &Witness, cfg: &ToleranceConfig) -> Result<bool>;
}

/// Runs a checker and downgrades any Violated verdict whose witness does not
/// re-verify to Inconclusive.
pub fn decide(
    checker: &dyn OrderChecker,
    x: &Distribution,
    y: &Distribution,
    cfg: &ToleranceConfig,
) -> Result<OrderVerdict> {
    if checker.requires_nonnegative() {
        x.require_nonnegative(cfg)?;
        y.require_nonnegative(cfg)?;
    }
    let v = checker.check(x, y, cfg)?;
    if let Some(w) = v.witness.filter(|_| v.is_violated()) {
        if !checker.reverify(x, y, &w, cfg)? {
            return Ok(OrderVerdict::inconclusive(
                format!("witness at {} did not re-verify", w.location),
                v.label,
            ));
        }
    }
    Ok(v)
}

/// Checkers keyed by lowercase name.
pub struct OrderRegistry {
    checkers: BTreeMap<String, Box<dyn OrderChecker>>,
}

impl Default for OrderRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl OrderRegistry {
    pub fn empty() -> Self {
        OrderRegistry {
            checkers: BTreeMap::new(),
        }
    }

    /// All six orders.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(StChecker));
        r.register(Box::new(HrChecker));
        r.register(Box::new(MomentChecker));
        r.register(Box::new(LtChecker));
        r.register(Box::new(ConvChecker));
        r.register(Box::new(IcxChecker));
        r
    }

    pub fn register(&mut self, checker: Box<dyn OrderChecker>) {
        self.checkers.insert(checker.name().to_string(), checker);
    }

    pub fn get(&self, name: &str) -> Result<&dyn OrderChecker> {
        self.checkers
            .get(&name.to_ascii_lowercase())
            .map(|c| c.as_ref())
            .ok_or_else(|| Error::Unknown {
                what: "order",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.checkers.keys().map(String::as_str).collect()
    }

    pub fn check(
        &self,
        name: &str,
        x: &Distribution,
        y: &Distribution,
        cfg: &ToleranceConfig,
    ) -> Result<OrderVerdict> {
        decide(self.get(name)?, x, y, cfg)
    }
}

fn checker_for(kind: OrderKind) -> Box<dyn OrderChecker> {
    match kind {
        OrderKind::St => Box::new(StChecker),
        OrderKind::Hr => Box::new(HrChecker),
        OrderKind::Moment => Box::new(MomentChecker),
        OrderKind::Lt => Box::new(LtChecker),
        OrderKind::Conv => Box::new(ConvChecker),
        OrderKind::Icx => Box::new(IcxChecker),
    }
}

pub fn check(kind: OrderKind, x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
    decide(checker_for(kind).as_ref(), x, y, cfg)
}

pub fn check_st(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
    check(OrderKind::St, x, y, cfg)
}

pub fn check_hr(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
    check(OrderKind::Hr, x, y, cfg)
}

pub fn check_moment(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
    check(OrderKind::Moment, x, y, cfg)
}

pub fn check_lt(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
    check(OrderKind::Lt, x, y, cfg)
}

pub fn check_conv(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
    check(OrderKind::Conv, x, y, cfg)
}

pub fn check_icx(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<OrderVerdict> {
    check(OrderKind::Icx, x, y, cfg)
}

/// Union of both support grids: uniform and quantile points, every atom
/// and a point just left of every atom.
pub fn merged_grid(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Vec<f64> {
    let mut pts = x.support_grid(cfg);
    pts.extend(y.support_grid(cfg));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

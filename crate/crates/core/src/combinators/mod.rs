//! Laws of `X + Z`, `X · Z`, `φ(X)`, `-X` and `cX` for independent inputs.
//!
//! Known families are combined in closed form. Everything else becomes a
//! [`GridCdf`](crate::GridCdf) computed by quadrature. These combinators
//! assume independence; there is no joint-law machinery.

mod closed;
mod quad;

use std::fmt;
use std::sync::Arc;

use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::{Error, Result};

pub use closed::shift;

/// A strictly increasing real function.
pub trait IncreasingMap: fmt::Debug + Send + Sync {
    fn apply(&self, t: f64) -> f64;

    fn name(&self) -> String;

    /// `(a, b)` when the map is `t ↦ a t + b`.
    fn as_affine(&self) -> Option<(f64, f64)> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cube;

impl IncreasingMap for Cube {
    fn apply(&self, t: f64) -> f64 {
        t * t * t
    }

    fn name(&self) -> String {
        "t^3".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpMap;

impl IncreasingMap for ExpMap {
    fn apply(&self, t: f64) -> f64 {
        t.exp()
    }

    fn name(&self) -> String {
        "exp(t)".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: f64,
}

impl AffineMap {
    pub fn new(scale: f64, shift: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param("map.scale", "must be finite and positive"));
        }
        if !shift.is_finite() {
            return Err(Error::param("map.shift", "must be finite"));
        }
        Ok(AffineMap { scale, shift })
    }
}

impl IncreasingMap for AffineMap {
    fn apply(&self, t: f64) -> f64 {
        self.scale * t + self.shift
    }

    fn name(&self) -> String {
        format!("{}t + {}", self.scale, self.shift)
    }

    fn as_affine(&self) -> Option<(f64, f64)> {
        Some((self.scale, self.shift))
    }
}

/// Wraps a closure; monotonicity is checked on the sampling grid.
pub struct FnMap<F> {
    pub f: F,
    pub label: String,
}

impl<F> fmt::Debug for FnMap<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnMap({})", self.label)
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> IncreasingMap for FnMap<F> {
    fn apply(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinationKind {
    Sum,
    Product,
    MonotoneMap,
    Negate,
    Scale,
}

/// A pending combination. Plans of the same kind can be evaluated on a
/// shared knot set with [`execute_aligned`], so that grid results compare
/// exactly at every knot.
#[derive(Debug, Clone)]
pub struct CombinationPlan {
    pub kind: CombinationKind,
    pub operands: Vec<Distribution>,
    pub map: Option<Arc<dyn IncreasingMap>>,
    pub factor: f64,
    pub cfg: ToleranceConfig,
}

impl CombinationPlan {
    pub fn sum(x: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> Self {
        Self::binary(CombinationKind::Sum, x, z, cfg)
    }

    pub fn product(x: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> Self {
        Self::binary(CombinationKind::Product, x, z, cfg)
    }

    pub fn monotone_map(x: &Distribution, map: Arc<dyn IncreasingMap>, cfg: &ToleranceConfig) -> Self {
        CombinationPlan {
            kind: CombinationKind::MonotoneMap,
            operands: vec![x.clone()],
            map: Some(map),
            factor: 1.0,
            cfg: cfg.clone(),
        }
    }

    pub fn negate(x: &Distribution) -> Self {
        CombinationPlan {
            kind: CombinationKind::Negate,
            operands: vec![x.clone()],
            map: None,
            factor: -1.0,
            cfg: ToleranceConfig::default(),
        }
    }

    pub fn scale(x: &Distribution, c: f64) -> Self {
        CombinationPlan {
            kind: CombinationKind::Scale,
            operands: vec![x.clone()],
            map: None,
            factor: c,
            cfg: ToleranceConfig::default(),
        }
    }

    fn binary(kind: CombinationKind, x: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> Self {
        CombinationPlan {
            kind,
            operands: vec![x.clone(), z.clone()],
            map: None,
            factor: 1.0,
            cfg: cfg.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            CombinationKind::Product => {
                let z = &self.operands[1];
                if !z.is_nonnegative(&self.cfg) {
                    return Err(Error::NegativeScaler(z.to_string()));
                }
            }
            CombinationKind::Scale => {
                if !(self.factor.is_finite() && self.factor > 0.0) {
                    return Err(Error::param("scale.c", "must be finite and positive"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The exact result, if the operands admit one.
    pub fn closed_form(&self) -> Result<Option<Distribution>> {
        self.validate()?;
        let ops = &self.operands;
        Ok(match self.kind {
            CombinationKind::Sum => closed::sum(&ops[0], &ops[1]),
            CombinationKind::Product => closed::product(&ops[0], &ops[1]),
            CombinationKind::Negate | CombinationKind::Scale => {
                Some(closed::scale_any(&ops[0], self.factor))
            }
            CombinationKind::MonotoneMap => {
                let map = self.map.as_ref().expect("map plan carries a map");
                map.as_affine()
                    .map(|(a, b)| closed::shift(&closed::scale_any(&ops[0], a), b))
            }
        })
    }

    /// Knots of the grid fallback, in the coordinate the plan evaluates on:
    /// result values for sums and products, pre-images for maps.
    pub fn native_points(&self) -> Vec<f64> {
        let ops = &self.operands;
        match self.kind {
            CombinationKind::Sum => quad::sum_points(&ops[0], &ops[1], &self.cfg),
            CombinationKind::Product => quad::product_points(&ops[0], &ops[1], &self.cfg),
            _ => ops[0].support_grid(&self.cfg),
        }
    }

    /// Grid fallback at explicit knots, bypassing the closed-form table.
    pub fn evaluate_on(&self, points: &[f64]) -> Result<Distribution> {
        self.validate()?;
        let ops = &self.operands;
        match self.kind {
            CombinationKind::Sum => quad::sum_on(&ops[0], &ops[1], points, &self.cfg),
            CombinationKind::Product => quad::product_on(&ops[0], &ops[1], points, &self.cfg),
            CombinationKind::MonotoneMap => {
                let map = self.map.as_ref().expect("map plan carries a map");
                quad::map_on(&ops[0], map.as_ref(), points, &self.cfg)
            }
            CombinationKind::Negate | CombinationKind::Scale => {
                Ok(closed::scale_any(&ops[0], self.factor))
            }
        }
    }

    /// Grid fallback on the plan's own knots.
    pub fn execute_numeric(&self) -> Result<Distribution> {
        self.evaluate_on(&self.native_points())
    }

    pub fn execute(&self) -> Result<Distribution> {
        match self.closed_form()? {
            Some(d) => Ok(d),
            None => self.execute_numeric(),
        }
    }
}

/// Executes plans of one kind so that every grid result shares the same
/// knots, which also include the evaluation grids of exact results.
pub fn execute_aligned(plans: &[CombinationPlan]) -> Result<Vec<Distribution>> {
    let Some(first) = plans.first() else {
        return Ok(Vec::new());
    };
    if plans.iter().any(|p| p.kind != first.kind) {
        return Err(Error::param("plans", "aligned execution needs a single kind"));
    }
    let closed: Vec<Option<Distribution>> = plans
        .iter()
        .map(CombinationPlan::closed_form)
        .collect::<Result<_>>()?;
    if closed.iter().all(Option::is_some) {
        return Ok(closed.into_iter().flatten().collect());
    }
    let mut knots = Vec::new();
    for (plan, exact) in plans.iter().zip(&closed) {
        match exact {
            None => knots.extend(plan.native_points()),
            Some(d) if first.kind != CombinationKind::MonotoneMap => {
                knots.extend(d.support_grid(&plan.cfg))
            }
            Some(_) => knots.extend(plan.operands[0].support_grid(&plan.cfg)),
        }
    }
    knots.retain(|t| t.is_finite());
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    plans
        .iter()
        .zip(closed)
        .map(|(plan, exact)| match exact {
            Some(d) => Ok(d),
            None => plan.evaluate_on(&knots),
        })
        .collect()
}

/// Law of `X + Z` for independent `X`, `Z`.
pub fn sum_of_independent(x: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> Result<Distribution> {
    CombinationPlan::sum(x, z, cfg).execute()
}

/// Law of `X · Z` for independent `X` and nonnegative `Z`.
pub fn product_of_independent(x: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> Result<Distribution> {
    CombinationPlan::product(x, z, cfg).execute()
}

/// Law of `φ(X)` for increasing `φ`, tabulated on the support grid of `X`.
pub fn monotone_map(x: &Distribution, map: Arc<dyn IncreasingMap>, cfg: &ToleranceConfig) -> Result<Distribution> {
    CombinationPlan::monotone_map(x, map, cfg).execute()
}

pub fn negate(x: &Distribution) -> Distribution {
    closed::scale_any(x, -1.0)
}

/// `cX` for `c > 0`.
pub fn scale(x: &Distribution, c: f64) -> Result<Distribution> {
    CombinationPlan::scale(x, c).execute()
}

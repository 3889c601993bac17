//! Order-preservation theorems run as experiments over concrete triples.

mod remarks;
mod suite;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::combinators::{execute_aligned, CombinationPlan, IncreasingMap};
use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::orders::{check, check_st, OrderKind};
use crate::verdict::{Location, OrderVerdict, Status, Witness};

pub use remarks::{reproduce_remark2, reproduce_remark5, CurveTable, Remark2, Remark5};
pub use suite::{
    generate_triples, reproduce_table1, CellValue, FamilyRanges, PropertyKind, SuiteSpec,
    Table1, Table1Cell,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Property {
    Additivity,
    Multiplicativity,
    Reflexivity,
    Antisymmetry,
    Transitivity,
    MonotoneMapPreservation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Confirmed,
    Refuted,
    /// The premise did not hold, so the triple says nothing.
    Skipped,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub order: OrderKind,
    /// Descriptors of the operands, in `(X, Y, Z)` order where applicable.
    pub triple: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub premise: Option<OrderVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<OrderVerdict>,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyReport {
    fn new(property: Property, order: OrderKind, triple: &[&Distribution]) -> Self {
        PropertyReport {
            property,
            order,
            triple: triple.iter().map(|d| d.to_string()).collect(),
            premise: None,
            conclusion: None,
            outcome: Outcome::Inconclusive,
            note: None,
        }
    }

    fn with(mut self, outcome: Outcome, note: impl Into<Option<String>>) -> Self {
        self.outcome = outcome;
        self.note = note.into();
        self
    }
}

/// A map `x ↦ x ∘ z` whose order preservation is under test.
pub trait PreservingMap: Send + Sync {
    fn property(&self) -> Property;

    fn name(&self) -> &'static str;

    /// Plans for `x ∘ z` and `y ∘ z`.
    fn plans(
        &self,
        x: &Distribution,
        y: &Distribution,
        z: &Distribution,
        cfg: &ToleranceConfig,
    ) -> [CombinationPlan; 2];

    /// Reason the triple falls outside the theorem's setting, if it does.
    fn precondition(&self, _order: OrderKind, _z: &Distribution, _cfg: &ToleranceConfig) -> Result<()> {
        Ok(())
    }
}

/// `x ↦ x + z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Addition;

impl PreservingMap for Addition {
    fn property(&self) -> Property {
        Property::Additivity
    }

    fn name(&self) -> &'static str {
        "additivity"
    }

    fn plans(&self, x: &Distribution, y: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> [CombinationPlan; 2] {
        [CombinationPlan::sum(x, z, cfg), CombinationPlan::sum(y, z, cfg)]
    }
}

/// `x ↦ x · z` for nonnegative `z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Multiplication;

impl PreservingMap for Multiplication {
    fn property(&self) -> Property {
        Property::Multiplicativity
    }

    fn name(&self) -> &'static str {
        "multiplicativity"
    }

    fn plans(&self, x: &Distribution, y: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> [CombinationPlan; 2] {
        [CombinationPlan::product(x, z, cfg), CombinationPlan::product(y, z, cfg)]
    }

    fn precondition(&self, _order: OrderKind, z: &Distribution, cfg: &ToleranceConfig) -> Result<()> {
        if z.is_nonnegative(cfg) {
            Ok(())
        } else {
            Err(Error::NegativeScaler(z.to_string()))
        }
    }
}

/// Preserving maps keyed by name.
pub struct MapRegistry {
    maps: BTreeMap<&'static str, Box<dyn PreservingMap>>,
}

impl Default for MapRegistry {
    fn default() -> Self {
        let mut r = MapRegistry { maps: BTreeMap::new() };
        r.register(Box::new(Addition));
        r.register(Box::new(Multiplication));
        r
    }
}

impl MapRegistry {
    pub fn register(&mut self, map: Box<dyn PreservingMap>) {
        self.maps.insert(map.name(), map);
    }

    pub fn get(&self, name: &str) -> Result<&dyn PreservingMap> {
        self.maps
            .get(name.to_ascii_lowercase().as_str())
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::Unknown {
                what: "property",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.maps.keys().copied().collect()
    }
}

fn verdict_or_note(r: Result<OrderVerdict>) -> std::result::Result<OrderVerdict, String> {
    r.map_err(|e| e.to_string())
}

/// Premise `X ≤ Y`, then conclusion `x ∘ z ≤ y ∘ z`. A Violated conclusion is
/// recomputed at four times the grid resolution and only counts as Refuted
/// if it persists.
pub fn verify_preservation(
    map: &dyn PreservingMap,
    order: OrderKind,
    x: &Distribution,
    y: &Distribution,
    z: &Distribution,
    cfg: &ToleranceConfig,
) -> Result<PropertyReport> {
    map.precondition(order, z, cfg)?;
    let mut report = PropertyReport::new(map.property(), order, &[x, y, z]);
    let premise = match verdict_or_note(check(order, x, y, cfg)) {
        Ok(v) => v,
        Err(note) => return Ok(report.with(Outcome::Skipped, note)),
    };
    let premise_holds = premise.is_holds();
    report.premise = Some(premise);
    if !premise_holds {
        return Ok(report.with(Outcome::Skipped, "premise does not hold".to_string()));
    }
    let conclusion = match conclude(map, order, x, y, z, cfg) {
        Ok(v) => v,
        Err(note) => return Ok(report.with(Outcome::Inconclusive, note)),
    };
    let status = conclusion.status;
    report.conclusion = Some(conclusion);
    Ok(match status {
        Status::Holds => report.with(Outcome::Confirmed, None),
        Status::Inconclusive => report.with(Outcome::Inconclusive, None),
        Status::Violated => match conclude(map, order, x, y, z, &cfg.refined(4)) {
            Ok(v) if v.is_violated() => {
                report.conclusion = Some(v);
                report.with(Outcome::Refuted, None)
            }
            Ok(_) => report.with(
                Outcome::Inconclusive,
                "violation did not persist at 4x grid resolution".to_string(),
            ),
            Err(note) => report.with(Outcome::Inconclusive, note),
        },
    })
}

fn conclude(
    map: &dyn PreservingMap,
    order: OrderKind,
    x: &Distribution,
    y: &Distribution,
    z: &Distribution,
    cfg: &ToleranceConfig,
) -> std::result::Result<OrderVerdict, String> {
    let combined = execute_aligned(&map.plans(x, y, z, cfg)).map_err(|e| e.to_string())?;
    verdict_or_note(check(order, &combined[0], &combined[1], cfg))
}

pub fn verify_additivity(
    order: OrderKind,
    x: &Distribution,
    y: &Distribution,
    z: &Distribution,
    cfg: &ToleranceConfig,
) -> Result<PropertyReport> {
    verify_preservation(&Addition, order, x, y, z, cfg)
}

/// Fails with `NegativeScaler` when `z` takes negative values.
pub fn verify_multiplicativity(
    order: OrderKind,
    x: &Distribution,
    y: &Distribution,
    z: &Distribution,
    cfg: &ToleranceConfig,
) -> Result<PropertyReport> {
    verify_preservation(&Multiplication, order, x, y, z, cfg)
}

/// `X ≤_st Y` implies `φ(X) ≤_st φ(Y)` for increasing `φ`.
pub fn verify_monotone_map(
    x: &Distribution,
    y: &Distribution,
    map: Arc<dyn IncreasingMap>,
    cfg: &ToleranceConfig,
) -> Result<PropertyReport> {
    let mut report = PropertyReport::new(Property::MonotoneMapPreservation, OrderKind::St, &[x, y]);
    report.triple.push(map.name());
    let premise = check_st(x, y, cfg)?;
    let premise_holds = premise.is_holds();
    report.premise = Some(premise);
    if !premise_holds {
        return Ok(report.with(Outcome::Skipped, "premise does not hold".to_string()));
    }
    let conclude = |cfg: &ToleranceConfig| -> Result<OrderVerdict> {
        let plans = [
            CombinationPlan::monotone_map(x, map.clone(), cfg),
            CombinationPlan::monotone_map(y, map.clone(), cfg),
        ];
        let mapped = execute_aligned(&plans)?;
        check_st(&mapped[0], &mapped[1], cfg)
    };
    let conclusion = conclude(cfg)?;
    let status = conclusion.status;
    report.conclusion = Some(conclusion);
    Ok(match status {
        Status::Holds => report.with(Outcome::Confirmed, None),
        Status::Inconclusive => report.with(Outcome::Inconclusive, None),
        Status::Violated => {
            let refined = conclude(&cfg.refined(4))?;
            if refined.is_violated() {
                report.conclusion = Some(refined);
                report.with(Outcome::Refuted, None)
            } else {
                report.with(
                    Outcome::Inconclusive,
                    "violation did not persist at 4x grid resolution".to_string(),
                )
            }
        }
    })
}

fn sup_cdf_gap(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> (f64, f64) {
    crate::orders::merged_grid(x, y, cfg)
        .into_iter()
        .map(|t| (t, (x.cdf(t) - y.cdf(t)).abs()))
        .fold((f64::NAN, 0.0), |acc, p| if p.1 > acc.1 { p } else { acc })
}

/// Reflexivity on every pool member, the antisymmetry surrogate on every
/// mutually ordered pair, and transitivity on every ordered triple whose two
/// premises hold. Members outside the order's domain are dropped.
pub fn verify_axioms(order: OrderKind, pool: &[Distribution], cfg: &ToleranceConfig) -> Vec<PropertyReport> {
    let pool: Vec<&Distribution> = pool
        .iter()
        .filter(|d| !order.requires_nonnegative() || d.is_nonnegative(cfg))
        .collect();
    let n = pool.len();
    let mut out = Vec::new();

    let mut verdicts: Vec<Vec<Option<OrderVerdict>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            verdicts[i][j] = check(order, pool[i], pool[j], cfg).ok();
        }
    }
    let holds = |i: usize, j: usize| verdicts[i][j].as_ref().is_some_and(OrderVerdict::is_holds);

    for i in 0..n {
        let r = PropertyReport::new(Property::Reflexivity, order, &[pool[i]]);
        out.push(match &verdicts[i][i] {
            Some(v) => {
                let outcome = match v.status {
                    Status::Holds => Outcome::Confirmed,
                    Status::Violated => Outcome::Refuted,
                    Status::Inconclusive => Outcome::Inconclusive,
                };
                PropertyReport {
                    conclusion: Some(v.clone()),
                    ..r
                }
                .with(outcome, None)
            }
            None => r.with(Outcome::Inconclusive, "check failed".to_string()),
        });
    }

    for i in 0..n {
        for j in i + 1..n {
            let mut r = PropertyReport::new(Property::Antisymmetry, order, &[pool[i], pool[j]]);
            r.premise = verdicts[i][j].clone();
            if order == OrderKind::Moment {
                out.push(r.with(
                    Outcome::Skipped,
                    "moment order antisymmetry is not asserted".to_string(),
                ));
                continue;
            }
            if !(holds(i, j) && holds(j, i)) {
                out.push(r.with(Outcome::Skipped, "premise does not hold".to_string()));
                continue;
            }
            let (t, gap) = sup_cdf_gap(pool[i], pool[j], cfg);
            let label = "sup |F_X - F_Y| <= 2 eps";
            let tol = 2.0 * cfg.eps_ineq;
            let v = if gap <= tol {
                OrderVerdict::holds(tol - gap, label)
            } else {
                OrderVerdict::violated(
                    Witness {
                        location: Location::Point(t),
                        lhs: pool[i].cdf(t),
                        rhs: pool[j].cdf(t),
                    },
                    tol - gap,
                    label,
                )
            };
            let outcome = if v.is_holds() { Outcome::Confirmed } else { Outcome::Refuted };
            r.conclusion = Some(v);
            out.push(r.with(outcome, None));
        }
    }

    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k || !(holds(i, j) && holds(j, k)) {
                    continue;
                }
                let mut r = PropertyReport::new(Property::Transitivity, order, &[pool[i], pool[j], pool[k]]);
                r.premise = verdicts[i][j].clone();
                r.conclusion = verdicts[i][k].clone();
                let outcome = match verdicts[i][k].as_ref().map(|v| v.status) {
                    Some(Status::Holds) => Outcome::Confirmed,
                    Some(Status::Violated) => Outcome::Refuted,
                    _ => Outcome::Inconclusive,
                };
                out.push(r.with(outcome, None));
            }
        }
    }
    out
}

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{verify_multiplicativity, Outcome, Property, PropertyReport};
use crate::combinators::{negate, sum_of_independent};
use crate::config::ToleranceConfig;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::orders::{check_conv, check_st, OrderKind};
use crate::transform::{phi_ratio, Rational};
use crate::verdict::OrderVerdict;

/// Columns of CDF values sampled on a common `t` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    /// CDFs of `dists` at `from, from + step, ..., to`.
    pub fn sample(names: &[&str], dists: &[&Distribution], from: f64, to: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && to >= from && step.is_finite()) {
            return Err(Error::param("step", "must be positive with to >= from"));
        }
        let n = ((to - from) / step + 1e-9).floor() as usize + 1;
        let mut columns = vec!["t".to_string()];
        columns.extend(names.iter().map(|s| s.to_string()));
        let rows = (0..n)
            .map(|i| {
                let t = from + i as f64 * step;
                std::iter::once(t).chain(dists.iter().map(|d| d.cdf(t))).collect()
            })
            .collect();
        Ok(CurveTable { columns, rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Dependent-summand counterexample to additivity of the usual order.
#[derive(Debug, Clone, Serialize)]
pub struct Remark2 {
    /// Premise `X ≤_st Y`; conclusion `0 ≤_st Y - X`.
    pub report: PropertyReport,
    /// `Y - X ≤_st 0`, which fails too: the two CDFs cross at zero.
    pub reverse: OrderVerdict,
    pub curves: CurveTable,
}

/// `X ~ N(0, 1/2)`, `Y ~ N(1, 1/2)`, `Z = -X`. The sums are `0` and `Y - X`,
/// whose law `N(1, 1)` is built from independent copies.
pub fn reproduce_remark2(cfg: &ToleranceConfig) -> Result<Remark2> {
    let x = Distribution::normal(0.0, 0.5)?;
    let y = Distribution::normal(1.0, 0.5)?;
    let zero = Distribution::point_mass(0.0)?;
    let diff = sum_of_independent(&y, &negate(&x), cfg)?;

    let premise = check_st(&x, &y, cfg)?;
    let conclusion = check_st(&zero, &diff, cfg)?;
    let reverse = check_st(&diff, &zero, cfg)?;
    let outcome = match (premise.is_holds(), conclusion.is_violated()) {
        (true, true) => Outcome::Refuted,
        (true, false) => Outcome::Confirmed,
        (false, _) => Outcome::Skipped,
    };
    let report = PropertyReport {
        property: Property::Additivity,
        order: OrderKind::St,
        triple: vec![x.to_string(), y.to_string(), "-X (dependent)".into()],
        premise: Some(premise),
        conclusion: Some(conclusion),
        outcome,
        note: Some(format!("Y - X ~ {diff}")),
    };
    let curves = CurveTable::sample(
        &["F_X", "F_Y", "F_0", "F_{Y-X}"],
        &[&x, &y, &zero, &diff],
        -3.0,
        4.0,
        0.01,
    )?;
    Ok(Remark2 { report, reverse, curves })
}

/// Exponential pair whose convolution order is destroyed by a Bernoulli
/// scaler.
#[derive(Debug, Clone, Serialize)]
pub struct Remark5 {
    /// `Exp(1) ≤_conv Exp(1/2)`.
    pub premise: OrderVerdict,
    #[serde(serialize_with = "as_string")]
    pub phi_xy: Rational,
    #[serde(serialize_with = "as_string")]
    pub phi_products: Rational,
    /// `(s, φ'_{XZ,YZ}(s))` samples on both sides of `s = 1`.
    pub phi_prime: Vec<(f64, f64)>,
    pub report: PropertyReport,
}

fn as_string<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

pub fn reproduce_remark5(cfg: &ToleranceConfig) -> Result<Remark5> {
    let x = Distribution::exponential(1.0)?;
    let y = Distribution::exponential(0.5)?;
    let z = Distribution::bernoulli(0.5)?;
    let premise = check_conv(&x, &y, cfg)?;
    let exact = |p: &crate::transform::PhiRatio| {
        p.simplified()
            .cloned()
            .ok_or_else(|| Error::param("phi", "expected a rational ratio"))
    };
    let phi_xy = exact(&phi_ratio(&x, &y, cfg)?)?;
    let xz = crate::combinators::product_of_independent(&x, &z, cfg)?;
    let yz = crate::combinators::product_of_independent(&y, &z, cfg)?;
    let ratio = phi_ratio(&xz, &yz, cfg)?;
    let phi_products = exact(&ratio)?;
    let d1 = ratio.derivative(1);
    let phi_prime = [0.5, 2.0]
        .into_iter()
        .map(|s| d1.eval(s).map(|e| (s, e.value)))
        .collect::<Result<_>>()?;
    let report = verify_multiplicativity(OrderKind::Conv, &x, &y, &z, cfg)?;
    Ok(Remark5 {
        premise,
        phi_xy,
        phi_products,
        phi_prime,
        report,
    })
}

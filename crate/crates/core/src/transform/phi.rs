use std::fmt;

use super::jet::Jet;
use super::laplace::{laplace_nonnegative, laplace_of_sum, ExpRational, LaplaceRep, QUADRATURE_JET_ORDER};
use super::poly::Poly;
use super::rational::Rational;
use crate::config::ToleranceConfig;
use crate::distribution::{Distribution, Provenance};
use crate::error::{Error, Result};
use crate::verdict::{Location, MarginTracker, OrderVerdict, Witness};

/// A value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Rational(Rational),
    Delayed { num: ExpRational, den: ExpRational },
    Numeric { num: LaplaceRep, den: LaplaceRep },
}

/// `φ(s) = L_Y(s) / L_X(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiRatio {
    form: Form,
    fd_step: f64,
}

/// Builds the ratio for nonnegative `x`, `y`. Fails with `DivideByZero` if
/// `L_X` vanishes on the configured s-grid.
pub fn phi_ratio(x: &Distribution, y: &Distribution, cfg: &ToleranceConfig) -> Result<PhiRatio> {
    let lx = laplace_nonnegative(x, cfg)?;
    let ly = laplace_nonnegative(y, cfg)?;
    let (lx, ly) = match cancel_common_summands(x, y) {
        Some((xs, ys)) => (laplace_of_sum(&xs, cfg), laplace_of_sum(&ys, cfg)),
        None => (lx, ly),
    };
    let exact = match (&lx, &ly) {
        _ if lx == ly => Some((ExpRational::constant(1.0), ExpRational::constant(1.0))),
        (LaplaceRep::Rational(ex), LaplaceRep::Rational(ey)) => Some((ex.clone(), ey.clone())),
        _ => None,
    };
    let form = match exact {
        Some((ex, ey)) => {
            let (den, num) = normalize_delays(&ex, &ey);
            for &s in &cfg.s_grid {
                if den.eval(s) <= 0.0 {
                    return Err(Error::DivideByZero(s));
                }
            }
            match (den.as_rational(), num.as_rational()) {
                _ if den == num => Form::Rational(Rational::constant(1.0)),
                (Some(rx), Some(ry)) => Form::Rational(ry.div(rx).simplify()),
                _ => Form::Delayed { num, den },
            }
        }
        None => {
            let c = lx.lower_bound().min(ly.lower_bound());
            let (lx, ly) = if c > 0.0 { (lx.advance(c), ly.advance(c)) } else { (lx, ly) };
            for &s in &cfg.s_grid {
                if lx.eval(s) <= 0.0 {
                    return Err(Error::DivideByZero(s));
                }
            }
            Form::Numeric { num: ly, den: lx }
        }
    };
    Ok(PhiRatio {
        form,
        fd_step: cfg.fd_step,
    })
}

/// Independent summands of `d` as recorded by the combinators; a unit-scale
/// shift counts as a point-mass summand.
fn summands(d: &Distribution) -> Vec<Distribution> {
    match d {
        Distribution::Grid(g) => match g.provenance() {
            Provenance::SumOf(parts) => parts.iter().flat_map(summands).collect(),
            _ => vec![d.clone()],
        },
        Distribution::Affine { base, scale, shift } if *scale == 1.0 => {
            let mut out = summands(base);
            out.push(Distribution::PointMass { c: *shift });
            out
        }
        Distribution::PointMass { c } if *c == 0.0 => Vec::new(),
        _ => vec![d.clone()],
    }
}

/// `φ_{X+Z, Y+Z} = φ_{X,Y}`: drops summands shared by both sides and returns
/// what is left of each, if anything was shared.
fn cancel_common_summands(x: &Distribution, y: &Distribution) -> Option<(Vec<Distribution>, Vec<Distribution>)> {
    let mut xs = summands(x);
    let mut ys = summands(y);
    let before = xs.len();
    xs.retain(|p| match ys.iter().position(|q| q == p) {
        Some(i) => {
            ys.remove(i);
            false
        }
        None => true,
    });
    (xs.len() < before).then_some((xs, ys))
}

/// Factors the smaller common delay out of both transforms so that
/// `e^{-d s}` cannot underflow in the denominator. Returns `(den, num)`.
fn normalize_delays(ex: &ExpRational, ey: &ExpRational) -> (ExpRational, ExpRational) {
    let (dx, dy) = (ex.min_delay(), ey.min_delay());
    let mut den = ex.advance(dx);
    let mut num = ey.advance(dy);
    let net = dy - dx;
    if net > 0.0 {
        num = num.mul(&ExpRational::delayed(1.0, net));
    } else if net < 0.0 {
        den = den.mul(&ExpRational::delayed(1.0, -net));
    }
    (den, num)
}

impl PhiRatio {
    /// Reduced rational form, available when both transforms are rational.
    pub fn simplified(&self) -> Option<&Rational> {
        match &self.form {
            Form::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Whether both transforms are symbolic (no quadrature involved).
    pub fn is_exact(&self) -> bool {
        !matches!(self.form, Form::Numeric { .. })
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.eval_with_error(s).value
    }

    pub fn eval_with_error(&self, s: f64) -> Estimate {
        match &self.form {
            Form::Rational(r) => {
                let v = r.eval(s);
                Estimate {
                    value: v,
                    error: 16.0 * f64::EPSILON * v.abs(),
                }
            }
            Form::Delayed { num, den } => {
                let v = num.eval(s) / den.eval(s);
                Estimate {
                    value: v,
                    error: 64.0 * f64::EPSILON * v.abs(),
                }
            }
            Form::Numeric { num, den } => {
                let (a, ea) = num.eval_with_error(s);
                let (b, eb) = den.eval_with_error(s);
                let v = a / b;
                Estimate {
                    value: v,
                    error: v.abs() * (ea / a.abs().max(1e-300) + eb / b) + f64::EPSILON * v.abs(),
                }
            }
        }
    }

    /// `φ^(n)(s)` for every `n <= n_max` at one point, sharing one Taylor
    /// expansion where the form allows it.
    pub fn derivatives_at(&self, s: f64, n_max: u32) -> Vec<Result<Estimate>> {
        let order = n_max as usize;
        let jets = match &self.form {
            Form::Delayed { num, den } => Some(quotient_jet(
                (num.jet(s, order), None),
                (den.jet(s, order), None),
            )),
            Form::Numeric { num, den } => match (num.jet_with_error(s, order), den.jet_with_error(s, order)) {
                (Some((jn, en)), Some((jd, ed))) => Some(quotient_jet((jn, Some(en)), (jd, Some(ed)))),
                _ => None,
            },
            Form::Rational(_) => None,
        };
        match jets {
            Some((q, bound)) => (0..=order)
                .map(|k| {
                    let fact: f64 = (1..=k).map(|j| j as f64).product();
                    Ok(Estimate {
                        value: q.0[k] * fact,
                        error: bound.0[k] * fact,
                    })
                })
                .collect(),
            None => (0..=n_max).map(|n| self.derivative(n).eval(s)).collect(),
        }
    }

    /// Evaluator for `φ^(n)`.
    pub fn derivative(&self, n: u32) -> PhiDerivative<'_> {
        let numerator = match &self.form {
            Form::Rational(r) => Some(r.derivative_numerator(n)),
            _ => None,
        };
        PhiDerivative {
            phi: self,
            n,
            numerator,
        }
    }
}

impl fmt::Display for PhiRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            Form::Rational(r) => write!(f, "{r}"),
            Form::Delayed { num, den } => write!(f, "[{num}] / [{den}]"),
            Form::Numeric { .. } => f.write_str("L_Y(s) / L_X(s) (numeric)"),
        }
    }
}

/// `φ^(n)` for a fixed `n`.
#[derive(Debug, Clone)]
pub struct PhiDerivative<'a> {
    phi: &'a PhiRatio,
    n: u32,
    numerator: Option<Poly>,
}

impl PhiDerivative<'_> {
    pub fn order(&self) -> u32 {
        self.n
    }

    /// Symbolic for rational ratios and Taylor jets otherwise: exact jets of
    /// delayed transforms, or jets of quadrature transforms differentiated
    /// under the integral. Orders beyond the quadrature jets fall back to
    /// [`PhiDerivative::finite_difference`].
    pub fn eval(&self, s: f64) -> Result<Estimate> {
        let n = self.n;
        match (&self.phi.form, &self.numerator) {
            (Form::Rational(r), Some(p)) => {
                let (value, error) = r.eval_derivative(p, n, s);
                Ok(Estimate { value, error })
            }
            (Form::Numeric { .. }, _) if n as usize > QUADRATURE_JET_ORDER => self.finite_difference(s),
            _ => self
                .phi
                .derivatives_at(s, n)
                .pop()
                .expect("orders 0..=n"),
        }
    }

    /// Richardson-extrapolated central differences of `φ`. Fails with
    /// `DerivativeUnstable` when the error estimate exceeds the magnitude.
    pub fn finite_difference(&self, s: f64) -> Result<Estimate> {
        let n = self.n;
        if n == 0 {
            return Ok(self.phi.eval_with_error(s));
        }
        let h = self.phi.fd_step * s;
        let (d1, r1) = self.central_difference(s, h);
        let (d2, r2) = self.central_difference(s, h / 2.0);
        let value = (4.0 * d2 - d1) / 3.0;
        let error = (d2 - d1).abs() / 3.0 + r1 + r2;
        if !value.is_finite() || error > value.abs() {
            return Err(Error::DerivativeUnstable { order: n, s });
        }
        Ok(Estimate { value, error })
    }

    /// n-th central difference with its propagated evaluation error.
    fn central_difference(&self, s: f64, h: f64) -> (f64, f64) {
        let n = self.n as i32;
        let mut acc = 0.0;
        let mut err = 0.0;
        let mut binom = 1.0;
        for k in 0..=n {
            let t = s + (n as f64 / 2.0 - k as f64) * h;
            let e = self.phi.eval_with_error(t);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * e.value;
            err += binom * (e.error + f64::EPSILON * e.value.abs());
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        let hn = h.powi(n);
        (acc / hn, err / hn)
    }
}

/// Taylor coefficients of `num / den` with an absolute error bound. Each
/// operand carries optional coefficient errors; rounding in the series
/// division is bounded through majorants.
fn quotient_jet(num: (Jet, Option<Jet>), den: (Jet, Option<Jet>)) -> (Jet, Jet) {
    let (jn, en) = num;
    let (jd, ed) = den;
    let order = jn.order();
    let q = jn.div(&jd);
    let majorant = jn.abs().div_majorant(&jd.abs());
    let mut bound: Vec<f64> = majorant
        .0
        .iter()
        .enumerate()
        .map(|(k, m)| 256.0 * f64::EPSILON * (k + 1) as f64 * m)
        .collect();
    if en.is_some() || ed.is_some() {
        // first-order perturbation: δq = (δN - q δD) / D
        let en = en.unwrap_or_else(|| Jet::zero(order));
        let ed = ed.unwrap_or_else(|| Jet::zero(order));
        let mut pert = q.abs().mul(&ed);
        pert.add_assign(&en);
        let prop = pert.div_majorant(&jd.abs());
        for (b, p) in bound.iter_mut().zip(&prop.0) {
            *b += p;
        }
    }
    (q, Jet(bound))
}

fn label(max_order: u32) -> String {
    format!("completely monotone up to order {max_order}")
}

/// Checks `(-1)^n φ^(n)(s) >= 0` for `n = 0..=max_deriv_order` over the
/// s-grid. Reports the first confident sign violation, scanning by
/// increasing order and then increasing `s`.
pub fn complete_monotonicity_check(phi: &PhiRatio, cfg: &ToleranceConfig) -> OrderVerdict {
    let n_max = cfg.max_deriv_order;
    let label = label(n_max);
    let table: Vec<Vec<Result<Estimate>>> = cfg.s_grid.iter().map(|&s| phi.derivatives_at(s, n_max)).collect();
    let mut tracker = MarginTracker::new();
    let mut unstable: Option<(u32, f64)> = None;
    for n in 0..=n_max {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for (row, &s) in table.iter().zip(&cfg.s_grid) {
            match &row[n as usize] {
                Ok(est) => {
                    let v = sign * est.value;
                    let location = Location::Derivative { n, s };
                    if -v > cfg.eps_ineq + est.error {
                        return OrderVerdict::violated(
                            Witness {
                                location,
                                lhs: v,
                                rhs: 0.0,
                            },
                            v,
                            label,
                        );
                    }
                    tracker.observe_with_error(location, v, 0.0, est.error);
                }
                Err(_) => {
                    unstable.get_or_insert((n, s));
                }
            }
        }
        if unstable.is_some() {
            // finite differences only get worse at higher orders
            break;
        }
    }
    match unstable {
        Some((n, s)) => OrderVerdict::inconclusive(
            format!("derivative of order {n} unstable at s={s}"),
            label,
        ),
        None => tracker.verdict(cfg.eps_ineq, &label),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp(rate: f64) -> Distribution {
        Distribution::exponential(rate).unwrap()
    }

    #[test]
    fn ratio_of_exponentials_simplifies() {
        let cfg = ToleranceConfig::default();
        let phi = phi_ratio(&exp(1.0), &exp(0.5), &cfg).unwrap();
        let r = phi.simplified().unwrap();
        assert_eq!(r.numer().coeffs(), &[1.0, 1.0]);
        assert_eq!(r.denom().coeffs(), &[1.0, 2.0]);
    }

    #[test]
    fn symbolic_derivatives_match_closed_form() {
        let cfg = ToleranceConfig::default();
        let phi = phi_ratio(&exp(1.0), &exp(0.5), &cfg).unwrap();
        for n in 1..=6u32 {
            let d = phi.derivative(n);
            for s in [0.1, 1.0, 10.0] {
                let got = d.eval(s).unwrap().value * if n % 2 == 0 { 1.0 } else { -1.0 };
                let fact: f64 = (1..=n).map(f64::from).product();
                let want = fact * 2f64.powi(n as i32 - 1) / (2.0 * s + 1.0).powi(n as i32 + 1);
                assert_relative_eq!(got, want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn jets_agree_with_symbolic_route() {
        let cfg = ToleranceConfig::default();
        let num = ExpRational::from_rational(Rational::new(Poly::constant(0.5), Poly::linear(0.5, 1.0)));
        let den = ExpRational::from_rational(Rational::new(Poly::one(), Poly::linear(1.0, 1.0)));
        let phi = phi_ratio(&exp(1.0), &exp(0.5), &cfg).unwrap();
        for n in 0..=6usize {
            for s in [0.05, 0.7, 4.0] {
                let (q, _) = quotient_jet((num.jet(s, n), None), (den.jet(s, n), None));
                let b = phi.derivative(n as u32).eval(s).unwrap();
                assert_relative_eq!(q.derivative(n), b.value, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn shift_ratio_is_completely_monotone() {
        let cfg = ToleranceConfig::default();
        let x = Distribution::bernoulli(0.3).unwrap();
        let y = Distribution::affine(x.clone(), 1.0, 0.5).unwrap();
        let phi = phi_ratio(&x, &y, &cfg).unwrap();
        assert!(complete_monotonicity_check(&phi, &cfg).is_holds());
    }

    #[test]
    fn finite_differences_track_exact_derivatives() {
        let cfg = ToleranceConfig::default();
        let num = LaplaceRep::Rational(ExpRational::from_rational(Rational::new(
            Poly::constant(0.5),
            Poly::linear(0.5, 1.0),
        )));
        let den = LaplaceRep::Rational(ExpRational::from_rational(Rational::new(
            Poly::one(),
            Poly::linear(1.0, 1.0),
        )));
        let numeric = PhiRatio {
            form: Form::Numeric { num, den },
            fd_step: cfg.fd_step,
        };
        let exact = phi_ratio(&exp(1.0), &exp(0.5), &cfg).unwrap();
        for n in 1..=3u32 {
            let s = 1.0;
            let a = numeric.derivative(n).finite_difference(s).unwrap();
            let b = exact.derivative(n).eval(s).unwrap();
            assert!((a.value - b.value).abs() <= 1e-4 * b.value.abs(), "n={n}");
        }
    }

    #[test]
    fn zero_transform_is_rejected() {
        let cfg = ToleranceConfig::default();
        let neg = Distribution::normal(-5.0, 1.0).unwrap();
        assert!(phi_ratio(&neg, &exp(1.0), &cfg).is_err());
    }

    #[test]
    fn shared_summands_cancel() {
        let cfg = ToleranceConfig::default();
        let z = Distribution::gamma(4.0, 0.94).unwrap();
        let x = crate::combinators::sum_of_independent(&exp(2.0), &z, &cfg).unwrap();
        let y = crate::combinators::sum_of_independent(&exp(1.0), &z, &cfg).unwrap();
        let phi = phi_ratio(&x, &y, &cfg).unwrap();
        let r = phi.simplified().expect("rational after cancellation");
        assert_eq!(r.denom().degree(), 1);
        assert_relative_eq!(phi.eval(1.0), 0.75, max_relative = 1e-12);
    }

    #[test]
    fn large_common_shift_does_not_underflow() {
        let cfg = ToleranceConfig::default();
        let x = Distribution::PointMass { c: 3.0 };
        let y = Distribution::Affine {
            base: Box::new(exp(1.0)),
            scale: 1.0,
            shift: 3.0,
        };
        let phi = phi_ratio(&x, &y, &cfg).unwrap();
        assert_relative_eq!(phi.eval(1000.0), 1.0 / 1001.0, max_relative = 1e-12);
    }

    #[test]
    fn quadrature_jets_match_differentiated_integrals() {
        let cfg = ToleranceConfig::default();
        let u = Distribution::uniform(0.0, 2.0).unwrap();
        let phi = phi_ratio(&Distribution::PointMass { c: 0.0 }, &u, &cfg).unwrap();
        assert!(!phi.is_exact());
        // composite Simpson for ∫_0^2 (-t)^n e^{-st} / 2 dt
        let oracle = |n: i32, s: f64| {
            let m = 20_000;
            let h = 2.0 / m as f64;
            let f = |t: f64| (-t).powi(n) * (-s * t).exp() / 2.0;
            let inner: f64 = (1..m)
                .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h))
                .sum();
            (f(0.0) + inner + f(2.0)) * h / 3.0
        };
        for n in 0..=8u32 {
            for s in [1e-3, 0.3, 5.0] {
                let got = phi.derivative(n).eval(s).unwrap();
                let want = oracle(n as i32, s);
                assert!((got.value - want).abs() <= 1e-9 * want.abs().max(1.0), "n={n} s={s}");
                assert!(got.error <= 1e-8 * want.abs().max(1.0), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn finite_differences_match_quadrature_jets() {
        let cfg = ToleranceConfig::default();
        let u = Distribution::uniform(0.5, 1.5).unwrap();
        let phi = phi_ratio(&exp(2.0), &u, &cfg).unwrap();
        for n in 1..=4u32 {
            let d = phi.derivative(n);
            let jet = d.eval(1.0).unwrap();
            let fd = d.finite_difference(1.0).unwrap();
            assert!((jet.value - fd.value).abs() <= 1e-4 * jet.value.abs(), "n={n}");
        }
    }
}

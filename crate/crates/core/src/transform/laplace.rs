use std::fmt;

use super::jet::Jet;
use super::poly::Poly;
use super::rational::Rational;
use crate::config::ToleranceConfig;
use crate::distribution::{Distribution, Provenance};
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// `Σ_k R_k(s) e^{-d_k s}`: rational terms with exponential delays. Atoms
/// at nonzero points contribute the delay factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpRational {
    /// `(delay, term)`, sorted by delay, delays distinct.
    terms: Vec<(f64, Rational)>,
}

impl ExpRational {
    pub fn from_rational(r: Rational) -> Self {
        ExpRational {
            terms: vec![(0.0, r)],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_rational(Rational::constant(c))
    }

    /// `c e^{-d s}`.
    pub fn delayed(c: f64, d: f64) -> Self {
        ExpRational {
            terms: vec![(d, Rational::constant(c))],
        }
    }

    pub fn terms(&self) -> &[(f64, Rational)] {
        &self.terms
    }

    /// The single undelayed rational term, when that is all there is.
    pub fn as_rational(&self) -> Option<&Rational> {
        match self.terms.as_slice() {
            [(d, r)] if *d == 0.0 => Some(r),
            _ => None,
        }
    }

    fn insert(terms: &mut Vec<(f64, Rational)>, d: f64, r: Rational) {
        match terms.iter_mut().find(|(e, _)| *e == d) {
            Some((_, acc)) => *acc = acc.add(&r),
            None => {
                terms.push((d, r));
                terms.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
        }
    }

    pub fn add(&self, other: &ExpRational) -> ExpRational {
        let mut terms = self.terms.clone();
        for (d, r) in &other.terms {
            Self::insert(&mut terms, *d, r.clone());
        }
        ExpRational { terms }
    }

    pub fn mul(&self, other: &ExpRational) -> ExpRational {
        let mut terms = Vec::new();
        for (d1, r1) in &self.terms {
            for (d2, r2) in &other.terms {
                Self::insert(&mut terms, d1 + d2, r1.mul(r2));
            }
        }
        ExpRational { terms }
    }

    pub fn scale(&self, k: f64) -> ExpRational {
        ExpRational {
            terms: self.terms.iter().map(|(d, r)| (*d, r.scale(k))).collect(),
        }
    }

    /// `L(k s)`, the transform of `k X`.
    pub fn compose_scale(&self, k: f64) -> ExpRational {
        ExpRational {
            terms: self
                .terms
                .iter()
                .map(|(d, r)| (d * k, r.compose_scale(k)))
                .collect(),
        }
    }

    /// Smallest delay, or 0 for the zero transform.
    pub fn min_delay(&self) -> f64 {
        self.terms.first().map_or(0.0, |t| t.0)
    }

    /// `e^{c s} L(s)`: every delay reduced by `c`.
    pub fn advance(&self, c: f64) -> ExpRational {
        ExpRational {
            terms: self.terms.iter().map(|(d, r)| (d - c, r.clone())).collect(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(d, r)| {
                let e = if *d == 0.0 { 1.0 } else { (-d * s).exp() };
                r.eval(s) * e
            })
            .sum()
    }

    /// Taylor jet about `s0` up to `order`.
    pub fn jet(&self, s0: f64, order: usize) -> Jet {
        let mut acc = Jet::zero(order);
        for (d, r) in &self.terms {
            let num = Jet::from_coeffs(r.numer().taylor_at(s0), order);
            let den = Jet::from_coeffs(r.denom().taylor_at(s0), order);
            let term = num.div(&den);
            let term = if *d == 0.0 {
                term
            } else {
                term.mul(&Jet::exp_delay(*d, s0, order))
            };
            acc.add_assign(&term);
        }
        acc
    }
}

impl fmt::Display for ExpRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(d, r)| {
                if *d == 0.0 {
                    r.to_string()
                } else {
                    format!("{r}*exp(-{d}s)")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Quadrature-backed transform `∫ e^{-st} dF(t)` over a truncated support.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureLaplace {
    pub dist: Distribution,
    pub lo: f64,
    pub hi: f64,
}

impl QuadratureLaplace {
    pub fn eval_with_error(&self, s: f64) -> (f64, f64) {
        if let Distribution::Grid(g) = &self.dist {
            let v = g.tabulated_laplace(s);
            return (v, 1e-14 * v.abs().max(1e-300));
        }
        let atoms: f64 = self
            .dist
            .atoms()
            .iter()
            .map(|&(t, p)| p * (-s * t).exp())
            .sum();
        if self.dist.total_atom_mass() >= 1.0 - 1e-15 || self.hi <= self.lo {
            return (atoms, 0.0);
        }
        let breaks = self.breaks(s);
        let dist = &self.dist;
        let est = quadrature::integrate_with_breaks(
            |t| (-s * t).exp() * dist.continuous_pdf(t),
            &breaks,
            Tolerance {
                abs: 1e-14,
                rel: 1e-12,
                max_intervals: 400,
            },
        );
        (atoms + est.value, est.error + self.truncated_mass())
    }

    /// Probability outside `[lo, hi]`, which the integrals ignore.
    fn truncated_mass(&self) -> f64 {
        (self.dist.cdf_left(self.lo) + self.dist.survival(self.hi)).max(0.0)
    }
}

/// Highest Taylor order available from [`QuadratureLaplace::jet_with_error`].
pub const QUADRATURE_JET_ORDER: usize = 16;
const JET_DIM: usize = QUADRATURE_JET_ORDER + 1;

impl QuadratureLaplace {
    /// Taylor coefficients `L^(k)(s) / k! = ∫ (-t)^k / k! e^{-st} dF(t)` for
    /// `k <= order`, by differentiating under the integral, with absolute
    /// error estimates. `None` above [`QUADRATURE_JET_ORDER`].
    pub fn jet_with_error(&self, s: f64, order: usize) -> Option<(Jet, Jet)> {
        if order > QUADRATURE_JET_ORDER {
            return None;
        }
        let powers = |t: f64, w: f64| {
            let mut out = [0.0; JET_DIM];
            let mut term = w;
            for (k, o) in out.iter_mut().enumerate().take(order + 1) {
                *o = term;
                term *= -t / (k + 1) as f64;
            }
            out
        };
        let mut value = vec![0.0; order + 1];
        let mut error = vec![0.0; order + 1];
        for (t, p) in self.dist.atoms() {
            let c = powers(t, p * (-s * t).exp());
            for k in 0..=order {
                value[k] += c[k];
                error[k] += 4.0 * f64::EPSILON * (k + 1) as f64 * c[k].abs();
            }
        }
        if self.dist.total_atom_mass() < 1.0 - 1e-15 && self.hi > self.lo {
            let breaks = match &self.dist {
                Distribution::Grid(g) => g.points().to_vec(),
                _ => self.breaks(s),
            };
            let dist = &self.dist;
            let est = quadrature::integrate_array(
                |t| powers(t, (-s * t).exp() * dist.continuous_pdf(t)),
                &breaks,
                Tolerance {
                    abs: 1e-300,
                    rel: 1e-11,
                    max_intervals: breaks.len() + 400,
                },
            );
            // estimate: the ignored tail mass sits near hi, where the weight
            // (t^k / k!) e^{-st} is evaluated
            let below = self.dist.cdf_left(self.lo);
            let above = self.dist.survival(self.hi);
            let mut weight = (-s * self.hi).exp();
            for k in 0..=order {
                value[k] += est[k].value;
                error[k] += est[k].error + 4.0 * f64::EPSILON * est[k].value.abs() + below + above * weight;
                weight *= self.hi / (k + 1) as f64;
            }
        }
        Some((Jet(value), Jet(error)))
    }

    fn breaks(&self, s: f64) -> Vec<f64> {
        let mut breaks = self.dist.breakpoints_within(self.lo, self.hi);
        if s > 0.0 {
            // resolve the boundary layer of e^{-st} near the lower end
            for k in [0.25, 1.0, 4.0, 16.0, 64.0] {
                let t = self.lo + k / s;
                if t < self.hi {
                    breaks.push(t);
                }
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
        }
        breaks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LaplaceRep {
    Rational(ExpRational),
    Quadrature(QuadratureLaplace),
    /// Transform of an independent sum: the product of the summands'.
    Product(Vec<LaplaceRep>),
}

impl LaplaceRep {
    pub fn eval(&self, s: f64) -> f64 {
        self.eval_with_error(s).0
    }

    pub fn eval_with_error(&self, s: f64) -> (f64, f64) {
        match self {
            LaplaceRep::Rational(e) => {
                let v = e.eval(s);
                (v, 16.0 * f64::EPSILON * v.abs())
            }
            LaplaceRep::Quadrature(q) => q.eval_with_error(s),
            LaplaceRep::Product(fs) => {
                let parts: Vec<(f64, f64)> = fs.iter().map(|f| f.eval_with_error(s)).collect();
                let value: f64 = parts.iter().map(|p| p.0).product();
                let error = (0..parts.len())
                    .map(|i| {
                        let others: f64 = parts
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, p)| p.0.abs())
                            .product();
                        parts[i].1 * others
                    })
                    .sum::<f64>()
                    + 4.0 * f64::EPSILON * parts.len() as f64 * value.abs();
                (value, error)
            }
        }
    }

    /// Taylor coefficients about `s` with absolute error estimates.
    pub fn jet_with_error(&self, s: f64, order: usize) -> Option<(Jet, Jet)> {
        match self {
            LaplaceRep::Rational(e) => {
                let j = e.jet(s, order);
                let err = Jet(
                    j.0.iter()
                        .enumerate()
                        .map(|(k, c)| 64.0 * f64::EPSILON * (k + 1) as f64 * c.abs())
                        .collect(),
                );
                Some((j, err))
            }
            LaplaceRep::Quadrature(q) => q.jet_with_error(s, order),
            LaplaceRep::Product(fs) => {
                let parts = fs
                    .iter()
                    .map(|f| f.jet_with_error(s, order))
                    .collect::<Option<Vec<_>>>()?;
                let one = Jet::from_coeffs(vec![1.0], order);
                let value = parts.iter().fold(one.clone(), |acc, (j, _)| acc.mul(j));
                let magnitude = parts.iter().fold(one.clone(), |acc, (j, _)| acc.mul(&j.abs()));
                let mut error = Jet(magnitude
                    .0
                    .iter()
                    .enumerate()
                    .map(|(k, m)| 16.0 * f64::EPSILON * (k + parts.len()) as f64 * m)
                    .collect());
                for (i, (_, e)) in parts.iter().enumerate() {
                    let others = parts
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .fold(one.clone(), |acc, (_, (j, _))| acc.mul(&j.abs()));
                    error.add_assign(&e.mul(&others));
                }
                Some((value, error))
            }
        }
    }

    pub fn as_exp_rational(&self) -> Option<&ExpRational> {
        match self {
            LaplaceRep::Rational(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, LaplaceRep::Rational(_))
    }

    /// Left end of the (truncated) support of the underlying variable.
    pub fn lower_bound(&self) -> f64 {
        match self {
            LaplaceRep::Rational(e) => e.min_delay(),
            LaplaceRep::Quadrature(q) => q.lo,
            LaplaceRep::Product(fs) => fs.iter().map(LaplaceRep::lower_bound).sum(),
        }
    }

    /// `e^{c s} L(s)`, the transform of the variable shifted left by `c`.
    /// Keeps large-`s` evaluations of laws supported away from zero from
    /// underflowing; `c` should not exceed [`LaplaceRep::lower_bound`].
    pub fn advance(&self, c: f64) -> LaplaceRep {
        match self {
            LaplaceRep::Rational(e) => LaplaceRep::Rational(e.advance(c)),
            LaplaceRep::Quadrature(q) => LaplaceRep::Quadrature(QuadratureLaplace {
                dist: Distribution::Affine {
                    base: Box::new(q.dist.clone()),
                    scale: 1.0,
                    shift: -c,
                },
                lo: q.lo - c,
                hi: q.hi - c,
            }),
            LaplaceRep::Product(fs) => {
                let mut left = c;
                LaplaceRep::Product(
                    fs.iter()
                        .map(|f| {
                            let step = left.min(f.lower_bound());
                            left -= step;
                            f.advance(step)
                        })
                        .collect(),
                )
            }
        }
    }
}

/// Exact representation when the family admits one.
pub fn exact_laplace(d: &Distribution) -> Option<ExpRational> {
    match d {
        Distribution::PointMass { c } => Some(ExpRational::delayed(1.0, *c)),
        Distribution::Bernoulli { p } => {
            Some(ExpRational::constant(1.0 - p).add(&ExpRational::delayed(*p, 1.0)))
        }
        Distribution::Exponential { rate } => Some(ExpRational::from_rational(Rational::new(
            Poly::constant(*rate),
            Poly::linear(*rate, 1.0),
        ))),
        Distribution::Gamma { shape, rate } if shape.fract() == 0.0 && *shape <= 64.0 => {
            let k = *shape as u32;
            Some(ExpRational::from_rational(Rational::new(
                Poly::constant(rate.powi(k as i32)),
                Poly::linear(*rate, 1.0).pow(k),
            )))
        }
        Distribution::Mixture(cs) => {
            let mut acc: Option<ExpRational> = None;
            for (w, c) in cs {
                let term = exact_laplace(c)?.scale(*w);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
            acc
        }
        Distribution::Affine { base, scale, shift } if *scale > 0.0 => {
            let b = exact_laplace(base)?.compose_scale(*scale);
            Some(if *shift == 0.0 {
                b
            } else {
                b.mul(&ExpRational::delayed(1.0, *shift))
            })
        }
        Distribution::Grid(g) => match g.provenance() {
            Provenance::SumOf(parts) => {
                let mut acc = ExpRational::constant(1.0);
                for p in parts {
                    acc = acc.mul(&exact_laplace(p)?);
                }
                Some(acc)
            }
            _ => None,
        },
        _ => None,
    }
}

/// Laplace transform of `d`: exact where the family allows, quadrature over
/// the truncated support otherwise.
pub fn laplace(d: &Distribution, cfg: &ToleranceConfig) -> LaplaceRep {
    match exact_laplace(d) {
        Some(e) => LaplaceRep::Rational(e),
        None if matches!(d, Distribution::Grid(g) if matches!(g.provenance(), Provenance::SumOf(_))) => {
            let Distribution::Grid(g) = d else { unreachable!() };
            let Provenance::SumOf(parts) = g.provenance() else { unreachable!() };
            laplace_of_sum(parts, cfg)
        }
        None => {
            let (lo, hi) = d.truncated_support(cfg);
            LaplaceRep::Quadrature(QuadratureLaplace {
                dist: d.clone(),
                lo,
                hi,
            })
        }
    }
}

/// Transform of the sum of independent `parts`: exact factors are merged into
/// one, the rest kept as separate quadratures rather than tabulating the sum.
pub fn laplace_of_sum(parts: &[Distribution], cfg: &ToleranceConfig) -> LaplaceRep {
    let mut exact = ExpRational::constant(1.0);
    let mut numeric = Vec::new();
    for p in parts {
        match laplace(p, cfg) {
            LaplaceRep::Rational(e) => exact = exact.mul(&e),
            LaplaceRep::Product(fs) => {
                for f in fs {
                    match f {
                        LaplaceRep::Rational(e) => exact = exact.mul(&e),
                        other => numeric.push(other),
                    }
                }
            }
            other => numeric.push(other),
        }
    }
    if numeric.is_empty() {
        return LaplaceRep::Rational(exact);
    }
    if exact != ExpRational::constant(1.0) {
        numeric.insert(0, LaplaceRep::Rational(exact));
    }
    if numeric.len() == 1 {
        numeric.pop().expect("one factor")
    } else {
        LaplaceRep::Product(numeric)
    }
}

/// Laplace transform for order checks, which require a nonnegative variable.
pub fn laplace_nonnegative(d: &Distribution, cfg: &ToleranceConfig) -> Result<LaplaceRep> {
    if !d.is_nonnegative(cfg) {
        return Err(Error::NotNonnegative(d.to_string()));
    }
    Ok(laplace(d, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn exponential_transform() {
        let l = laplace(&Distribution::exponential(1.0).unwrap(), &cfg());
        assert!(l.is_exact());
        assert_abs_diff_eq!(l.eval(1.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn point_mass_at_zero_is_one() {
        let l = laplace(&Distribution::point_mass(0.0).unwrap(), &cfg());
        for s in [1e-3, 1.0, 1e3] {
            assert_eq!(l.eval(s), 1.0);
        }
    }

    #[test]
    fn bernoulli_transform() {
        let l = laplace(&Distribution::bernoulli(0.5).unwrap(), &cfg());
        for s in [0.1, 1.0, 5.0] {
            assert_abs_diff_eq!(l.eval(s), 0.5 + 0.5 * (-s).exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn product_with_bernoulli_scaler_is_rational() {
        // 0.5 δ0 + 0.5 Exp(1)  →  (s + 2) / (2 (s + 1))
        let m = Distribution::mixture(vec![
            (0.5, Distribution::point_mass(0.0).unwrap()),
            (0.5, Distribution::exponential(1.0).unwrap()),
        ])
        .unwrap();
        let e = exact_laplace(&m).unwrap();
        let r = e.as_rational().expect("delays at zero merge");
        for s in [0.1, 1.0, 7.0] {
            assert_abs_diff_eq!(r.eval(s), (s + 2.0) / (2.0 * (s + 1.0)), epsilon = 1e-15);
        }
    }

    #[test]
    fn exact_and_quadrature_agree() {
        let c = cfg();
        let dists = [
            Distribution::exponential(0.7).unwrap(),
            Distribution::gamma(3.0, 2.0).unwrap(),
            Distribution::mixture(vec![
                (0.3, Distribution::bernoulli(0.4).unwrap()),
                (0.7, Distribution::exponential(2.0).unwrap()),
            ])
            .unwrap(),
        ];
        for d in &dists {
            let exact = laplace(d, &c);
            let (lo, hi) = d.truncated_support(&c);
            let quad = LaplaceRep::Quadrature(QuadratureLaplace { dist: d.clone(), lo, hi });
            for &s in &c.s_grid {
                assert_abs_diff_eq!(exact.eval(s), quad.eval(s), epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn normalized_at_origin() {
        let c = cfg();
        for d in [
            Distribution::uniform(0.0, 2.0).unwrap(),
            Distribution::gamma(2.5, 1.0).unwrap(),
            Distribution::exponential(3.0).unwrap(),
        ] {
            assert_abs_diff_eq!(laplace(&d, &c).eval(1e-9), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn negative_variable_rejected() {
        let d = Distribution::normal(0.0, 1.0).unwrap();
        assert!(matches!(laplace_nonnegative(&d, &cfg()), Err(Error::NotNonnegative(_))));
    }

    #[test]
    fn affine_scaling_of_exponential() {
        let d = Distribution::affine(Distribution::exponential(1.0).unwrap(), 2.0, 0.5).unwrap();
        let e = exact_laplace(&d).unwrap();
        for s in [0.2, 1.0, 3.0] {
            assert_abs_diff_eq!(e.eval(s), (-0.5 * s).exp() / (1.0 + 2.0 * s), epsilon = 1e-15);
        }
    }
}

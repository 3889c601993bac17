use std::fmt;

use super::poly::Poly;

/// Ratio of real polynomials in `s`, normalized so the denominator's
/// constant term is 1 (Laplace transforms are finite and nonzero at 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Rational {
    numer: Poly,
    denom: Poly,
}

const GCD_TOL: f64 = 1e-10;

impl Rational {
    pub fn new(numer: Poly, denom: Poly) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        let mut r = Rational { numer, denom };
        r.normalize();
        r
    }

    pub fn constant(c: f64) -> Self {
        Rational::new(Poly::constant(c), Poly::one())
    }

    fn normalize(&mut self) {
        let c0 = self.denom.coeffs()[0];
        let k = if c0 != 0.0 { c0 } else { self.denom.leading() };
        if k != 1.0 {
            self.numer = self.numer.scale(1.0 / k);
            self.denom = self.denom.scale(1.0 / k);
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.numer
    }

    pub fn denom(&self) -> &Poly {
        &self.denom
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.numer.eval(s) / self.denom.eval(s)
    }

    pub fn is_constant(&self) -> bool {
        self.numer.degree() == 0 && self.denom.degree() == 0
    }

    /// Cancel common polynomial factors.
    pub fn simplify(&self) -> Rational {
        if self.numer.is_zero() {
            return Rational::constant(0.0);
        }
        let g = self.numer.gcd(&self.denom, GCD_TOL);
        if g.degree() == 0 {
            return self.clone();
        }
        let (n, _) = self.numer.div_rem(&g);
        let (d, _) = self.denom.div_rem(&g);
        Rational::new(n.trim_relative(1e-14), d.trim_relative(1e-14))
    }

    pub fn add(&self, other: &Rational) -> Rational {
        if self.denom == other.denom {
            return Rational::new(&self.numer + &other.numer, self.denom.clone());
        }
        Rational::new(
            &(&self.numer * &other.denom) + &(&other.numer * &self.denom),
            &self.denom * &other.denom,
        )
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        Rational::new(&self.numer * &other.numer, &self.denom * &other.denom)
    }

    pub fn div(&self, other: &Rational) -> Rational {
        Rational::new(&self.numer * &other.denom, &self.denom * &other.numer)
    }

    pub fn scale(&self, k: f64) -> Rational {
        Rational::new(self.numer.scale(k), self.denom.clone())
    }

    /// `r(k s)`.
    pub fn compose_scale(&self, k: f64) -> Rational {
        Rational::new(self.numer.compose_scale(k), self.denom.compose_scale(k))
    }

    /// Numerator polynomial `P_n` with `r^(n) = P_n / D^(n+1)`, built by
    /// `P_{k+1} = P_k' D - (k+1) P_k D'`. Degrees grow linearly in `n`.
    pub fn derivative_numerator(&self, n: u32) -> Poly {
        let d = &self.denom;
        let dd = d.derivative();
        let mut p = self.numer.clone();
        for k in 0..n {
            p = &(&p.derivative() * d) - &(&p * &dd).scale((k + 1) as f64);
        }
        p
    }

    /// `r^(n)(s)` with a rounding-error estimate.
    pub fn derivative_at(&self, n: u32, s: f64) -> (f64, f64) {
        let p = self.derivative_numerator(n);
        self.eval_derivative(&p, n, s)
    }

    pub(crate) fn eval_derivative(&self, p: &Poly, n: u32, s: f64) -> (f64, f64) {
        let dv = self.denom.eval(s).powi(n as i32 + 1);
        let value = p.eval(s) / dv;
        let err = 64.0 * f64::EPSILON * (n as f64 + 1.0) * p.eval_abs(s) / dv.abs();
        (value, err)
    }

    /// Whether the denominator changes sign (or vanishes) on `[0, ∞)`,
    /// scanned on a log grid plus the sign at infinity.
    pub fn denominator_has_nonnegative_root(&self) -> bool {
        let d = &self.denom;
        if d.eval(0.0) == 0.0 {
            return true;
        }
        let sign0 = d.eval(0.0).signum();
        let mut s = 1e-8;
        while s < 1e8 {
            if d.eval(s).signum() != sign0 {
                return true;
            }
            s *= 1.05;
        }
        d.degree() > 0 && d.leading().signum() != sign0
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.numer, self.denom)
    }
}

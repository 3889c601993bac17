use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Real polynomial, coefficients in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim_exact();
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn zero() -> Self {
        Poly::new(vec![0.0])
    }

    pub fn one() -> Self {
        Poly::constant(1.0)
    }

    /// `a + b s`
    pub fn linear(a: f64, b: f64) -> Self {
        Poly::new(vec![a, b])
    }

    fn trim_exact(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    /// Drop leading coefficients below `tol` times the largest magnitude.
    pub fn trim_relative(mut self, tol: f64) -> Self {
        let scale = self.max_abs();
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().abs() <= tol * scale {
            self.coeffs.pop();
        }
        self
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// `Σ |c_i| |s|^i`, a scale for rounding-error estimates.
    pub fn eval_abs(&self, s: f64) -> f64 {
        let a = s.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * a + c.abs())
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `p(k s)`.
    pub fn compose_scale(&self, k: f64) -> Poly {
        let mut f = 1.0;
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let v = c * f;
                    f *= k;
                    v
                })
                .collect(),
        )
    }

    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::one(), |acc, _| &acc * self)
    }

    /// Taylor coefficients about `s0`: `p(s0 + h) = Σ c_k h^k`.
    pub fn taylor_at(&self, s0: f64) -> Vec<f64> {
        // repeated synthetic division by (s - s0)
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = 0.0;
            for i in (k..n).rev() {
                acc = acc * s0 + work[i];
                work[i] = acc;
            }
            out.push(work[k]);
        }
        out
    }

    /// Euclidean division; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let d = divisor.degree();
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if self.degree() < d {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![0.0; self.degree() - d + 1];
        for i in (0..q.len()).rev() {
            let c = rem[i + d] / lead;
            q[i] = c;
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= c * dc;
            }
            rem[i + d] = 0.0;
        }
        rem.truncate(d.max(1));
        (Poly::new(q), Poly::new(rem))
    }

    /// Monic greatest common divisor, treating remainders whose
    /// coefficients fall below `tol` (relative) as zero.
    pub fn gcd(&self, other: &Poly, tol: f64) -> Poly {
        let scale = self.max_abs().max(other.max_abs()).max(f64::MIN_POSITIVE);
        let (mut a, mut b) = if self.degree() >= other.degree() {
            (self.clone(), other.clone())
        } else {
            (other.clone(), self.clone())
        };
        while !(b.is_zero() || b.max_abs() <= tol * scale) {
            let (_, r) = a.div_rem(&b);
            let r = if r.max_abs() <= tol * scale.max(a.max_abs()) {
                Poly::zero()
            } else {
                r
            };
            a = b;
            b = r;
        }
        a.scale(1.0 / a.leading())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && self.coeffs.len() > 1 {
                continue;
            }
            let term = match i {
                0 => format!("{c}"),
                1 if c == 1.0 => "s".to_string(),
                1 => format!("{c}s"),
                _ if c == 1.0 => format!("s^{i}"),
                _ => format!("{c}s^{i}"),
            };
            terms.push(term);
        }
        write!(f, "{}", terms.join(" + ").replace("+ -", "- "))
    }
}

//! Truncated Taylor series ("jets") about a fixed point, used to
//! differentiate transforms that carry exponential delay factors.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn zero(order: usize) -> Self {
        Jet(vec![0.0; order + 1])
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn add_assign(&mut self, other: &Jet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += self.0[i] * other.0[j];
            }
        }
        Jet(out)
    }

    /// Series quotient; the divisor's constant term must be nonzero.
    pub fn div(&self, other: &Jet) -> Jet {
        let n = self.0.len();
        let b0 = other.0[0];
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.0[k];
            for j in 1..=k {
                acc -= other.0[j] * out[k - j];
            }
            out[k] = acc / b0;
        }
        Jet(out)
    }

    /// `e^{-d s}` about `s0`.
    pub fn exp_delay(d: f64, s0: f64, order: usize) -> Jet {
        let mut out = Vec::with_capacity(order + 1);
        let mut c = (-d * s0).exp();
        out.push(c);
        for k in 1..=order {
            c *= -d / k as f64;
            out.push(c);
        }
        Jet(out)
    }

    /// Coefficients padded/truncated to `order`.
    pub fn from_coeffs(mut c: Vec<f64>, order: usize) -> Jet {
        c.resize(order + 1, 0.0);
        Jet(c)
    }

    /// Coefficient-wise absolute values.
    pub fn abs(&self) -> Jet {
        Jet(self.0.iter().map(|c| c.abs()).collect())
    }

    /// Majorant of the quotient's coefficients from majorants of the
    /// operands, used to bound rounding in [`Jet::div`].
    pub fn div_majorant(&self, other: &Jet) -> Jet {
        let n = self.0.len();
        let b0 = other.0[0].abs();
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.0[k].abs();
            for j in 1..=k {
                acc += other.0[j].abs() * out[k - j];
            }
            out[k] = acc / b0;
        }
        Jet(out)
    }

    /// `f^(n)(s0) = n! c_n`.
    pub fn derivative(&self, n: usize) -> f64 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        self.0[n] * fact
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_of_geometric_series() {
        // 1 / (1 - h) = 1 + h + h^2 + ...
        let one = Jet::from_coeffs(vec![1.0], 4);
        let d = Jet::from_coeffs(vec![1.0, -1.0], 4);
        assert_eq!(one.div(&d).0, vec![1.0; 5]);
    }

    #[test]
    fn exp_delay_derivatives() {
        let j = Jet::exp_delay(2.0, 0.5, 3);
        let base = (-1.0f64).exp();
        assert!((j.derivative(0) - base).abs() < 1e-15);
        assert!((j.derivative(1) + 2.0 * base).abs() < 1e-15);
        assert!((j.derivative(3) + 8.0 * base).abs() < 1e-14);
    }
}

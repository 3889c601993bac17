
use super::Distribution;
use crate::error::{Error, Result};

/// How a grid came to be. Convolution and product results remember their
/// independent factors so transforms and moments stay exact.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Provenance {
    #[default]
    Tabulated,
    SumOf(Vec<Distribution>),
    ProductOf(Vec<Distribution>),
}

/// Tabulated CDF. Between knots the CDF is linear, except that a knot
/// flagged as an atom is reached by a flat segment followed by a jump, so the
/// whole increment `cdf[i] - cdf[i-1]` is point mass at `points[i]`. A
/// positive value at the first knot is likewise an atom there.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCdf {
    points: Vec<f64>,
    cdf: Vec<f64>,
    atoms: Vec<bool>,
    density: Option<Vec<f64>>,
    provenance: Provenance,
}

const LAST_TOL: f64 = 1e-9;

impl GridCdf {
    pub fn new(points: Vec<f64>, mut cdf: Vec<f64>, atoms: Vec<bool>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("grid.points", "must be nonempty"));
        }
        if cdf.len() != points.len() || atoms.len() != points.len() {
            return Err(Error::param(
                "grid.cdf",
                format!(
                    "points, cdf and atom columns differ in length ({}, {}, {})",
                    points.len(),
                    cdf.len(),
                    atoms.len()
                ),
            ));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("grid.points", "must be finite"));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "grid.points",
                format!("not strictly increasing at index {}", i + 1),
            ));
        }
        if cdf.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("grid.cdf", "values must lie in [0, 1]"));
        }
        if let Some(i) = cdf.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::param(
                "grid.cdf",
                format!("decreases at index {}", i + 1),
            ));
        }
        let last = cdf.len() - 1;
        if (cdf[last] - 1.0).abs() > LAST_TOL {
            return Err(Error::param(
                "grid.cdf",
                format!("final value must be 1 (got {})", cdf[last]),
            ));
        }
        cdf[last] = 1.0;
        Ok(GridCdf {
            points,
            cdf,
            atoms,
            density: None,
            provenance: Provenance::Tabulated,
        })
    }

    /// Attach a density column for the absolutely continuous part, interpolated
    /// linearly between knots.
    pub fn with_density(mut self, density: Vec<f64>) -> Result<Self> {
        if density.len() != self.points.len() {
            return Err(Error::param("grid.density", "length differs from points"));
        }
        if density.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("grid.density", "must be finite and nonnegative"));
        }
        self.density = Some(density);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn atom_flags(&self) -> &[bool] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&[f64]> {
        self.density.as_deref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index `i` with `points[i] <= t < points[i + 1]`; requires
    /// `points[0] <= t < points[last]`.
    fn segment(&self, t: f64) -> usize {
        self.points.partition_point(|&p| p <= t) - 1
    }

    fn is_atom(&self, i: usize) -> bool {
        if i == 0 {
            self.cdf[0] > 0.0
        } else {
            self.atoms[i] && self.cdf[i] > self.cdf[i - 1]
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let n = self.points.len();
        if t < self.points[0] {
            return 0.0;
        }
        if t >= self.points[n - 1] {
            return 1.0;
        }
        let i = self.segment(t);
        if self.atoms[i + 1] {
            return self.cdf[i];
        }
        let (t0, t1) = (self.points[i], self.points[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    pub fn cdf_left(&self, t: f64) -> f64 {
        match self.points.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(0) if self.is_atom(0) => 0.0,
            Ok(j) if j > 0 && self.is_atom(j) => self.cdf[j - 1],
            _ => self.cdf(t),
        }
    }

    pub fn atoms(&self) -> Vec<(f64, f64)> {
        (0..self.points.len())
            .filter(|&i| self.is_atom(i))
            .map(|i| {
                let prev = if i == 0 { 0.0 } else { self.cdf[i - 1] };
                (self.points[i], self.cdf[i] - prev)
            })
            .collect()
    }

    fn slope(&self, i: usize) -> f64 {
        if self.atoms[i + 1] {
            0.0
        } else {
            (self.cdf[i + 1] - self.cdf[i]) / (self.points[i + 1] - self.points[i])
        }
    }

    /// Density of the continuous part, taking the right-hand segment at knots.
    pub fn continuous_pdf(&self, t: f64) -> f64 {
        let n = self.points.len();
        if n < 2 || t < self.points[0] || t >= self.points[n - 1] {
            return 0.0;
        }
        let i = self.segment(t);
        match &self.density {
            Some(d) => {
                if self.atoms[i + 1] {
                    return 0.0;
                }
                let (t0, t1) = (self.points[i], self.points[i + 1]);
                let w = (t - t0) / (t1 - t0);
                d[i] + w * (d[i + 1] - d[i])
            }
            None => self.slope(i),
        }
    }

    /// Rough bound on the interpolation error of `(cdf, density)` at `t`,
    /// from second differences of the neighbouring knots.
    pub fn interpolation_error(&self, t: f64) -> (f64, f64) {
        let n = self.points.len();
        if n < 3 || t <= self.points[0] || t >= self.points[n - 1] {
            return (0.0, 0.0);
        }
        let slope_change = |i: usize| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 2);
            (lo..hi)
                .map(|j| (self.slope(j + 1) - self.slope(j)).abs())
                .fold(0.0, f64::max)
        };
        if let Ok(j) = self.points.binary_search_by(|p| p.total_cmp(&t)) {
            let pdf_err = match &self.density {
                Some(d) => 1e-9 * d[j],
                None => slope_change(j),
            };
            return (0.0, pdf_err);
        }
        let i = self.segment(t);
        let h = self.points[i + 1] - self.points[i];
        let cdf_err = 0.25 * slope_change(i) * h;
        let pdf_err = match &self.density {
            Some(d) => {
                let lo = i.saturating_sub(1);
                let hi = (i + 2).min(n - 1);
                (lo..hi - 1)
                    .map(|j| (d[j + 2] - 2.0 * d[j + 1] + d[j]).abs())
                    .fold(0.0, f64::max)
                    * 0.25
                    + 1e-9 * d[i].max(d[i + 1])
            }
            None => slope_change(i),
        };
        (cdf_err, pdf_err)
    }

    /// Density where a density model applies: the density column, or the
    /// segment slope away from kinks.
    pub fn pdf(&self, t: f64) -> Result<f64> {
        let n = self.points.len();
        if self.density.is_some() {
            return Ok(self.continuous_pdf(t));
        }
        if n < 2 || t < self.points[0] || t > self.points[n - 1] {
            return Ok(0.0);
        }
        if let Ok(j) = self.points.binary_search_by(|p| p.total_cmp(&t)) {
            let left = if j == 0 { 0.0 } else { self.slope(j - 1) };
            let right = if j + 1 == n { 0.0 } else { self.slope(j) };
            if (left - right).abs() > 1e-9 * left.abs().max(right.abs()) {
                return Err(Error::DensityUndefined(t));
            }
            return Ok(right);
        }
        Ok(self.continuous_pdf(t))
    }

    /// Raw moment of the piecewise-linear model: atoms plus exact segment
    /// integrals of `t^m` against the constant segment slope.
    pub fn tabulated_moment(&self, m: u32) -> f64 {
        let k = m as i32;
        let mut acc: f64 = self.atoms().iter().map(|&(t, p)| p * t.powi(k)).sum();
        for i in 0..self.points.len().saturating_sub(1) {
            let slope = self.slope(i);
            if slope == 0.0 {
                continue;
            }
            let (a, b) = (self.points[i], self.points[i + 1]);
            acc += slope * (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64;
        }
        acc
    }

    /// Laplace transform of the piecewise-linear model, exact per segment.
    pub fn tabulated_laplace(&self, s: f64) -> f64 {
        let mut acc: f64 = self.atoms().iter().map(|&(t, p)| p * (-s * t).exp()).sum();
        for i in 0..self.points.len().saturating_sub(1) {
            let slope = self.slope(i);
            if slope == 0.0 {
                continue;
            }
            let (a, b) = (self.points[i], self.points[i + 1]);
            let seg = if s == 0.0 {
                b - a
            } else {
                (-s * a).exp() * (-(-s * (b - a)).exp_m1()) / s
            };
            acc += slope * seg;
        }
        acc
    }

    /// `∫_x^∞ (1 - F(t)) dt` for the piecewise-linear model.
    pub fn tabulated_stop_loss(&self, x: f64) -> f64 {
        let n = self.points.len();
        let last = self.points[n - 1];
        if x >= last {
            return 0.0;
        }
        let mut acc = 0.0;
        let first = self.points[0];
        if x < first {
            acc += first - x;
        }
        for i in 0..n - 1 {
            let (a, b) = (self.points[i], self.points[i + 1]);
            if b <= x {
                continue;
            }
            let lo = a.max(x);
            let (fa, fb) = (self.cdf(lo), self.cdf_left(b));
            let flat = self.atoms[i + 1];
            let width = b - lo;
            acc += if flat {
                (1.0 - self.cdf[i]) * width
            } else {
                (1.0 - 0.5 * (fa + fb)) * width
            };
        }
        acc
    }
}

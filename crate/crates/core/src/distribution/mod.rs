//! Random-variable representation and its basic functionals.
//!
//! CDFs are right-continuous, `F(t) = P(X <= t)`. Atoms are first-class:
//! they are reported by [`Distribution::atoms`] and never folded into a
//! density value.

mod grid;
pub mod spec;

use std::fmt;

use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, ln_gamma};

pub use grid::{GridCdf, Provenance};

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Weight tolerance for mixtures.
pub const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    PointMass { c: f64 },
    Bernoulli { p: f64 },
    Normal { mean: f64, variance: f64 },
    Exponential { rate: f64 },
    Uniform { a: f64, b: f64 },
    Gamma { shape: f64, rate: f64 },
    Mixture(Vec<(f64, Distribution)>),
    Grid(GridCdf),
    /// `scale * base + shift`, for laws with no closed family under the map.
    Affine {
        base: Box<Distribution>,
        scale: f64,
        shift: f64,
    },
}

/// Value of the density at a point: either a density of the continuous part
/// or the mass of an atom sitting there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Value(f64),
    AtomMass(f64),
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal_quantile(q: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * q)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Merge atoms at identical locations and sort by location.
fn merge_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.retain(|a| a.1 > 0.0);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (t, m) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == t => last.1 += m,
            _ => out.push((t, m)),
        }
    }
    out
}

impl Distribution {
    pub fn point_mass(c: f64) -> Result<Self> {
        let d = Distribution::PointMass { c };
        d.validate()?;
        Ok(d)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        let d = Distribution::Bernoulli { p };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        let d = Distribution::Normal { mean, variance };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let d = Distribution::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = Distribution::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        let d = Distribution::Gamma { shape, rate };
        d.validate()?;
        Ok(d)
    }

    pub fn mixture(components: Vec<(f64, Distribution)>) -> Result<Self> {
        let d = Distribution::Mixture(components);
        d.validate()?;
        Ok(d)
    }

    pub fn grid(grid: GridCdf) -> Self {
        Distribution::Grid(grid)
    }

    pub fn affine(base: Distribution, scale: f64, shift: f64) -> Result<Self> {
        let d = Distribution::Affine {
            base: Box::new(base),
            scale,
            shift,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(field: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be finite (got {v})")))
            }
        }
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be positive (got {v})")))
            }
        }
        match self {
            Distribution::PointMass { c } => finite("pointmass.c", *c),
            Distribution::Bernoulli { p } => {
                if (0.0..=1.0).contains(p) {
                    Ok(())
                } else {
                    Err(Error::param("bernoulli.p", format!("must lie in [0, 1] (got {p})")))
                }
            }
            Distribution::Normal { mean, variance } => {
                finite("normal.mean", *mean)?;
                positive("normal.variance", *variance)
            }
            Distribution::Exponential { rate } => positive("exponential.rate", *rate),
            Distribution::Uniform { a, b } => {
                finite("uniform.a", *a)?;
                finite("uniform.b", *b)?;
                if a < b {
                    Ok(())
                } else {
                    Err(Error::param("uniform.b", format!("must exceed a ({a} >= {b})")))
                }
            }
            Distribution::Gamma { shape, rate } => {
                positive("gamma.shape", *shape)?;
                positive("gamma.rate", *rate)
            }
            Distribution::Mixture(components) => {
                if components.is_empty() {
                    return Err(Error::param("mixture.components", "must be nonempty"));
                }
                let mut total = 0.0;
                for (w, d) in components {
                    if !(0.0..=1.0).contains(w) {
                        return Err(Error::param(
                            "mixture.components",
                            format!("weight {w} outside [0, 1]"),
                        ));
                    }
                    total += w;
                    d.validate()?;
                }
                if (total - 1.0).abs() > WEIGHT_TOL {
                    return Err(Error::param(
                        "mixture.components",
                        format!("weights sum to {total}, not 1"),
                    ));
                }
                Ok(())
            }
            Distribution::Grid(_) => Ok(()),
            Distribution::Affine { base, scale, shift } => {
                finite("affine.shift", *shift)?;
                if !(scale.is_finite() && *scale != 0.0) {
                    return Err(Error::param("affine.scale", "must be finite and nonzero"));
                }
                base.validate()
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Distribution::PointMass { c } => {
                if t >= *c {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Bernoulli { p } => {
                if t < 0.0 {
                    0.0
                } else if t < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            Distribution::Normal { mean, variance } => std_normal_cdf((t - mean) / variance.sqrt()),
            Distribution::Exponential { rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
            Distribution::Uniform { a, b } => ((t - a) / (b - a)).clamp(0.0, 1.0),
            Distribution::Gamma { shape, rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    gamma_cdf(*shape, rate * t)
                }
            }
            Distribution::Mixture(cs) => cs.iter().map(|(w, d)| w * d.cdf(t)).sum::<f64>().min(1.0),
            Distribution::Grid(g) => g.cdf(t),
            Distribution::Affine { base, scale, shift } => {
                let image = |u: f64| scale * u + shift;
                let u = (t - shift) / scale;
                if *scale > 0.0 {
                    base.cdf(last_where(u, |u| image(u) <= t))
                } else {
                    1.0 - base.cdf_left(-last_where(-u, |w| image(-w) <= t))
                }
            }
        }
    }

    /// `P(X < t)`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        match self {
            Distribution::PointMass { c } => {
                if t > *c {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Bernoulli { p } => {
                if t <= 0.0 {
                    0.0
                } else if t <= 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            Distribution::Mixture(cs) => cs.iter().map(|(w, d)| w * d.cdf_left(t)).sum::<f64>().min(1.0),
            Distribution::Grid(g) => g.cdf_left(t),
            Distribution::Affine { base, scale, shift } => {
                let image = |u: f64| scale * u + shift;
                let u = (t - shift) / scale;
                if *scale > 0.0 {
                    base.cdf(last_where(u, |u| image(u) < t))
                } else {
                    1.0 - base.cdf(last_where(u, |u| image(u) >= t))
                }
            }
            _ => self.cdf(t),
        }
    }

    pub fn survival(&self, t: f64) -> f64 {
        1.0 - self.cdf(t)
    }

    /// Point masses, sorted by location, with coincident atoms merged.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Distribution::PointMass { c } => vec![(*c, 1.0)],
            Distribution::Bernoulli { p } => merge_atoms(vec![(0.0, 1.0 - p), (1.0, *p)]),
            Distribution::Mixture(cs) => merge_atoms(
                cs.iter()
                    .flat_map(|(w, d)| d.atoms().into_iter().map(move |(t, m)| (t, w * m)))
                    .collect(),
            ),
            Distribution::Grid(g) => g.atoms(),
            Distribution::Affine { base, scale, shift } => merge_atoms(
                base.atoms()
                    .into_iter()
                    .map(|(t, m)| (scale * t + shift, m))
                    .collect(),
            ),
            _ => Vec::new(),
        }
    }

    pub fn atom_mass_at(&self, t: f64) -> f64 {
        (self.cdf(t) - self.cdf_left(t)).max(0.0)
    }

    pub fn total_atom_mass(&self) -> f64 {
        self.atoms().iter().map(|a| a.1).sum()
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.atoms().is_empty()
    }

    /// Density of the absolutely continuous part (sub-probability density).
    pub fn continuous_pdf(&self, t: f64) -> f64 {
        match self {
            Distribution::PointMass { .. } | Distribution::Bernoulli { .. } => 0.0,
            Distribution::Normal { mean, variance } => {
                let sd = variance.sqrt();
                std_normal_pdf((t - mean) / sd) / sd
            }
            Distribution::Exponential { rate } => {
                if t < 0.0 {
                    0.0
                } else {
                    rate * (-rate * t).exp()
                }
            }
            Distribution::Uniform { a, b } => {
                if t >= *a && t < *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Distribution::Gamma { shape, rate } => {
                if t < 0.0 || (t == 0.0 && *shape > 1.0) {
                    0.0
                } else if t == 0.0 {
                    if *shape == 1.0 {
                        *rate
                    } else {
                        f64::INFINITY
                    }
                } else {
                    let x = rate * t;
                    if let Some(n) = small_integer(*shape) {
                        if x > 700.0 {
                            return 0.0;
                        }
                        (-x).exp() * x.powi(n as i32 - 1) / factorial(n - 1) * rate
                    } else {
                        ((shape - 1.0) * x.ln() - x - ln_gamma(*shape)).exp() * rate
                    }
                }
            }
            Distribution::Mixture(cs) => cs.iter().map(|(w, d)| w * d.continuous_pdf(t)).sum(),
            Distribution::Grid(g) => g.continuous_pdf(t),
            Distribution::Affine { base, scale, shift } => {
                base.continuous_pdf((t - shift) / scale) / scale.abs()
            }
        }
    }

    pub fn pdf(&self, t: f64) -> Result<Density> {
        let atom = self.atom_mass_at(t);
        if atom > 0.0 {
            return Ok(Density::AtomMass(atom));
        }
        match self {
            Distribution::Grid(g) => g.pdf(t).map(Density::Value),
            Distribution::Mixture(cs) => {
                let mut acc = 0.0;
                for (w, d) in cs {
                    match d.pdf(t)? {
                        Density::Value(v) => acc += w * v,
                        Density::AtomMass(_) => unreachable!("atom mass checked above"),
                    }
                }
                Ok(Density::Value(acc))
            }
            Distribution::Affine { base, scale, shift } => match base.pdf((t - shift) / scale)? {
                Density::Value(v) => Ok(Density::Value(v / scale.abs())),
                Density::AtomMass(m) => Ok(Density::AtomMass(m)),
            },
            _ => Ok(Density::Value(self.continuous_pdf(t))),
        }
    }

    /// `pdf / survival`, defined away from atoms where survival exceeds
    /// `survival_floor`.
    pub fn hazard(&self, t: f64, survival_floor: f64) -> Result<f64> {
        let surv = self.survival(t);
        if surv <= survival_floor {
            return Err(Error::HazardUndefined {
                t,
                reason: "survival at or below floor",
            });
        }
        match self.pdf(t) {
            Ok(Density::Value(f)) => Ok(f / surv),
            Ok(Density::AtomMass(_)) => Err(Error::HazardUndefined {
                t,
                reason: "atom at t",
            }),
            Err(_) => Err(Error::HazardUndefined {
                t,
                reason: "no density model at t",
            }),
        }
    }

    /// `E[X^m]`, closed form per family.
    pub fn moment(&self, m: u32) -> Result<f64> {
        if m == 0 {
            return Ok(1.0);
        }
        let k = m as i32;
        let v = match self {
            Distribution::PointMass { c } => c.powi(k),
            Distribution::Bernoulli { p } => *p,
            Distribution::Normal { mean, variance } => {
                // E[X^j] = mean E[X^{j-1}] + (j-1) variance E[X^{j-2}]
                let (mut prev, mut cur) = (1.0, *mean);
                for j in 2..=m {
                    let next = mean * cur + (j - 1) as f64 * variance * prev;
                    prev = cur;
                    cur = next;
                }
                cur
            }
            Distribution::Exponential { rate } => {
                (1..=m).fold(1.0, |acc, j| acc * j as f64 / rate)
            }
            Distribution::Gamma { shape, rate } => {
                (0..m).fold(1.0, |acc, j| acc * (shape + j as f64) / rate)
            }
            Distribution::Uniform { a, b } => {
                // sum of a^i b^(m-i) over i, divided by m+1; avoids cancellation
                (0..=k).map(|i| a.powi(i) * b.powi(k - i)).sum::<f64>() / (m + 1) as f64
            }
            Distribution::Mixture(cs) => {
                let mut acc = 0.0;
                for (w, d) in cs {
                    acc += w * d.moment(m)?;
                }
                acc
            }
            Distribution::Grid(g) => match g.provenance() {
                Provenance::SumOf(parts) => sum_moment(parts, m)?,
                Provenance::ProductOf(parts) => {
                    let mut acc = 1.0;
                    for p in parts {
                        acc *= p.moment(m)?;
                    }
                    acc
                }
                Provenance::Tabulated => g.tabulated_moment(m),
            },
            Distribution::Affine { base, scale, shift } => {
                let mut acc = 0.0;
                for j in 0..=m {
                    acc += binomial(m, j)
                        * scale.powi(j as i32)
                        * shift.powi((m - j) as i32)
                        * base.moment(j)?;
                }
                acc
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::MomentDiverges(m))
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1).expect("every family has a finite mean")
    }

    pub fn variance(&self) -> f64 {
        let m1 = self.mean();
        (self.moment(2).expect("finite second moment") - m1 * m1).max(0.0)
    }

    /// Raw moment by quadrature over the truncated support, independent of
    /// the closed forms in [`Distribution::moment`].
    pub fn moment_by_quadrature(&self, m: u32, cfg: &ToleranceConfig) -> f64 {
        let k = m as i32;
        let atoms: f64 = self.atoms().iter().map(|&(t, p)| p * t.powi(k)).sum();
        if let Distribution::Grid(g) = self {
            return g.tabulated_moment(m);
        }
        if self.total_atom_mass() >= 1.0 - 1e-15 {
            return atoms;
        }
        let (lo, hi) = self.truncated_support(cfg);
        let breaks = self.breakpoints_within(lo, hi);
        let tol = Tolerance {
            abs: 1e-13,
            rel: 1e-12,
            max_intervals: 500,
        };
        atoms
            + quadrature::integrate_with_breaks(|t| t.powi(k) * self.continuous_pdf(t), &breaks, tol)
                .value
    }

    /// Generalized inverse `inf { t : F(t) >= q }` for `0 < q < 1`.
    pub fn quantile(&self, q: f64) -> f64 {
        debug_assert!(q > 0.0 && q < 1.0);
        match self {
            Distribution::PointMass { c } => *c,
            Distribution::Bernoulli { p } => {
                if q <= 1.0 - p {
                    0.0
                } else {
                    1.0
                }
            }
            Distribution::Normal { mean, variance } => mean + variance.sqrt() * std_normal_quantile(q),
            Distribution::Exponential { rate } => -(-q).ln_1p() / rate,
            Distribution::Uniform { a, b } => a + q * (b - a),
            Distribution::Affine { base, scale, shift } if *scale > 0.0 => {
                scale * base.quantile(q) + shift
            }
            _ => self.quantile_by_bisection(q),
        }
    }

    fn quantile_by_bisection(&self, q: f64) -> f64 {
        let (slo, shi) = self.support();
        if slo.is_finite() && self.cdf(slo) >= q {
            return slo;
        }
        let mid = self.mean();
        let spread = self.variance().sqrt().max(1e-3);
        let mut lo = slo;
        if !lo.is_finite() {
            lo = mid - spread;
            let mut step = spread;
            while self.cdf(lo) >= q {
                lo -= step;
                step *= 2.0;
            }
        }
        let mut hi = shi;
        if !hi.is_finite() {
            hi = mid + spread;
            let mut step = spread;
            while self.cdf(hi) < q {
                hi += step;
                step *= 2.0;
            }
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if self.cdf(m) >= q {
                hi = m;
            } else {
                lo = m;
            }
        }
        hi
    }

    /// Closed support hull; endpoints may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::PointMass { c } => (*c, *c),
            Distribution::Bernoulli { p } => {
                if *p == 0.0 {
                    (0.0, 0.0)
                } else if *p == 1.0 {
                    (1.0, 1.0)
                } else {
                    (0.0, 1.0)
                }
            }
            Distribution::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution::Exponential { .. } | Distribution::Gamma { .. } => (0.0, f64::INFINITY),
            Distribution::Uniform { a, b } => (*a, *b),
            Distribution::Mixture(cs) => cs
                .iter()
                .filter(|(w, _)| *w > 0.0)
                .map(|(_, d)| d.support())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, s| {
                    (acc.0.min(s.0), acc.1.max(s.1))
                }),
            Distribution::Grid(g) => {
                let pts = g.points();
                let first = g
                    .cdf_values()
                    .iter()
                    .position(|&v| v > 0.0)
                    .map(|i| if i == 0 || g.atom_flags()[i] { pts[i] } else { pts[i - 1] })
                    .unwrap_or(pts[0]);
                (first, pts[pts.len() - 1])
            }
            Distribution::Affine { base, scale, shift } => {
                let (a, b) = base.support();
                let (x, y) = (scale * a + shift, scale * b + shift);
                (x.min(y), x.max(y))
            }
        }
    }

    /// Support with infinite ends replaced by the truncation quantiles.
    pub fn truncated_support(&self, cfg: &ToleranceConfig) -> (f64, f64) {
        let (lo, hi) = self.support();
        let lo = if lo.is_finite() { lo } else { self.quantile(cfg.trunc_lo) };
        let hi = if hi.is_finite() { hi } else { self.quantile(cfg.trunc_hi) };
        (lo, hi)
    }

    /// True when the mass below `-eps_ineq` does not exceed the lower
    /// truncation level.
    pub fn is_nonnegative(&self, cfg: &ToleranceConfig) -> bool {
        self.support().0 >= 0.0 || self.cdf(-cfg.eps_ineq) <= cfg.trunc_lo
    }

    pub fn require_nonnegative(&self, cfg: &ToleranceConfig) -> Result<()> {
        if self.is_nonnegative(cfg) {
            Ok(())
        } else {
            Err(Error::NotNonnegative(self.to_string()))
        }
    }

    /// Points where the continuous density may jump or blow up.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out = match self {
            Distribution::Exponential { .. } | Distribution::Gamma { .. } => vec![0.0],
            Distribution::Uniform { a, b } => vec![*a, *b],
            Distribution::Mixture(cs) => cs.iter().flat_map(|(_, d)| d.kinks()).collect(),
            Distribution::Grid(g) => {
                let p = g.points();
                vec![p[0], p[p.len() - 1]]
            }
            Distribution::Affine { base, scale, shift } => {
                base.kinks().into_iter().map(|t| scale * t + shift).collect()
            }
            _ => Vec::new(),
        };
        out.extend(self.atoms().into_iter().map(|a| a.0));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Sorted integration breakpoints: `lo`, `hi` and every kink strictly
    /// between them.
    pub fn breakpoints_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut b = vec![lo];
        b.extend(self.kinks().into_iter().filter(|&t| t > lo && t < hi));
        b.push(hi);
        b
    }

    /// Evaluation points covering the truncated support: a uniform grid, a
    /// quantile grid, every atom and a point just left of every atom.
    pub fn support_grid(&self, cfg: &ToleranceConfig) -> Vec<f64> {
        let mut pts = Vec::with_capacity(cfg.grid_size + 8);
        match self {
            Distribution::PointMass { c } => pts.push(*c),
            Distribution::Bernoulli { .. } => pts.extend([0.0, 1.0]),
            Distribution::Grid(g) => pts.extend_from_slice(g.points()),
            _ => {
                let (lo, hi) = self.truncated_support(cfg);
                let half = (cfg.grid_size / 2).max(2);
                if hi > lo {
                    pts.extend((0..half).map(|i| lo + (hi - lo) * i as f64 / (half - 1) as f64));
                }
                let atoms_only = self.total_atom_mass() >= 1.0 - 1e-15;
                if !atoms_only {
                    let (ql, qh) = (cfg.trunc_lo, cfg.trunc_hi);
                    pts.extend((0..half).map(|i| {
                        self.quantile(ql + (qh - ql) * i as f64 / (half - 1) as f64)
                    }));
                }
            }
        }
        for (a, _) in self.atoms() {
            pts.push(a);
            pts.push(just_left_of(a));
        }
        pts.retain(|t| t.is_finite());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Largest float near `u0` satisfying `pred`, which must hold on a prefix of
/// the reals. Resolves `(t - shift) / scale` so that an atom placed at
/// `scale * a + shift` is counted exactly when that image is.
fn last_where(u0: f64, pred: impl Fn(f64) -> bool) -> f64 {
    if !u0.is_finite() {
        return u0;
    }
    let mut u = u0;
    for _ in 0..8 {
        if pred(u) {
            break;
        }
        u = u.next_down();
    }
    for _ in 0..8 {
        let up = u.next_up();
        if !pred(up) {
            break;
        }
        u = up;
    }
    u
}

/// A point strictly left of `t`, close enough to read the left limit.
pub fn just_left_of(t: f64) -> f64 {
    t - 1e-9 * t.abs().max(1.0)
}

/// `E[(X_1 + ... + X_k)^m]` for independent parts via the binomial identity.
pub fn sum_moment(parts: &[Distribution], m: u32) -> Result<f64> {
    // moments of the running partial sum, orders 0..=m
    let mut acc: Vec<f64> = vec![1.0; (m + 1) as usize];
    acc.iter_mut().skip(1).for_each(|v| *v = 0.0);
    let mut first = true;
    for p in parts {
        let pm: Vec<f64> = (0..=m).map(|j| p.moment(j)).collect::<Result<_>>()?;
        if first {
            acc = pm;
            first = false;
            continue;
        }
        acc = (0..=m)
            .map(|j| (0..=j).map(|k| binomial(j, k) * acc[k as usize] * pm[(j - k) as usize]).sum())
            .collect();
    }
    Ok(acc[m as usize])
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::PointMass { c } => write!(f, "PointMass({})", fmt_num(*c)),
            Distribution::Bernoulli { p } => write!(f, "Bernoulli({})", fmt_num(*p)),
            Distribution::Normal { mean, variance } => {
                write!(f, "Normal({}, {})", fmt_num(*mean), fmt_num(*variance))
            }
            Distribution::Exponential { rate } => write!(f, "Exponential({})", fmt_num(*rate)),
            Distribution::Uniform { a, b } => write!(f, "Uniform({}, {})", fmt_num(*a), fmt_num(*b)),
            Distribution::Gamma { shape, rate } => {
                write!(f, "Gamma({}, {})", fmt_num(*shape), fmt_num(*rate))
            }
            Distribution::Mixture(cs) => {
                write!(f, "Mixture[")?;
                for (i, (w, d)) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}*{}", fmt_num(*w), d)?;
                }
                write!(f, "]")
            }
            Distribution::Grid(g) => match g.provenance() {
                Provenance::Tabulated => write!(f, "Grid({} points)", g.len()),
                Provenance::SumOf(ps) => {
                    let names: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                    write!(f, "Grid({})", names.join(" + "))
                }
                Provenance::ProductOf(ps) => {
                    let names: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                    write!(f, "Grid({})", names.join(" * "))
                }
            },
            Distribution::Affine { base, scale, shift } => {
                write!(f, "{}*{} + {}", fmt_num(*scale), base, fmt_num(*shift))
            }
        }
    }
}


fn small_integer(a: f64) -> Option<usize> {
    (a.fract() == 0.0 && (1.0..=64.0).contains(&a)).then_some(a as usize)
}

fn factorial(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

/// Regularized lower incomplete gamma `P(a, x)`. Small integer shapes use
/// the Poisson sum, which is exact and far cheaper than the general routine.
fn gamma_cdf(a: f64, x: f64) -> f64 {
    let Some(n) = small_integer(a) else {
        return gamma_lr(a, x);
    };
    if x < a {
        // e^{-x} Σ_{k>=n} x^k / k!, a tail that converges fast for x < n
        let mut term = (-x).exp() * x.powi(n as i32) / factorial(n);
        let mut acc = 0.0;
        let mut k = n;
        while term > acc * 1e-17 && term > 0.0 {
            acc += term;
            k += 1;
            term *= x / k as f64;
        }
        acc
    } else {
        let mut term = (-x).exp();
        let mut acc = 0.0;
        for k in 0..n {
            acc += term;
            term *= x / (k + 1) as f64;
        }
        1.0 - acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exp(rate: f64) -> Distribution {
        Distribution::exponential(rate).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let n = Distribution::normal(0.0, 0.5).unwrap();
        assert_abs_diff_eq!(n.cdf(0.0), 0.5, epsilon = 1e-15);
        let pm = Distribution::point_mass(0.0).unwrap();
        assert_eq!(pm.cdf(-1e-12), 0.0);
        assert_eq!(pm.cdf(0.0), 1.0);
        assert_abs_diff_eq!(exp(1.0).cdf(1.0), 1.0 - (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(exp(1.0).cdf(1.0), 0.632121, epsilon = 1e-6);
    }

    #[test]
    fn survival_examples() {
        assert_eq!(exp(1.0).survival(0.0), 1.0);
        assert_eq!(Distribution::point_mass(1.0).unwrap().survival(0.5), 1.0);
        assert_abs_diff_eq!(exp(0.5).survival(2.0), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn pdf_examples() {
        match exp(2.0).pdf(0.5).unwrap() {
            Density::Value(v) => assert_abs_diff_eq!(v, 2.0 * (-1.0f64).exp(), epsilon = 1e-15),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            Distribution::uniform(0.0, 2.0).unwrap().pdf(1.0).unwrap(),
            Density::Value(0.5)
        );
        assert_eq!(
            Distribution::bernoulli(0.5).unwrap().pdf(1.0).unwrap(),
            Density::AtomMass(0.5)
        );
    }

    #[test]
    fn hazard_examples() {
        for t in [0.0, 0.3, 2.0, 7.5] {
            assert_abs_diff_eq!(exp(1.7).hazard(t, 1e-6).unwrap(), 1.7, epsilon = 1e-9);
        }
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(u.hazard(0.5, 1e-6).unwrap(), 2.0, epsilon = 1e-12);
        let b = Distribution::bernoulli(0.5).unwrap();
        assert!(matches!(b.hazard(1.0, 1e-6), Err(Error::HazardUndefined { .. })));
        assert!(matches!(exp(1.0).hazard(40.0, 1e-6), Err(Error::HazardUndefined { .. })));
    }

    #[test]
    fn moment_examples() {
        let mut fact = 1.0;
        for m in 1..=8 {
            fact *= m as f64;
            assert_abs_diff_eq!(exp(1.0).moment(m).unwrap(), fact, epsilon = 1e-9 * fact);
        }
        let pm = Distribution::point_mass(1.5).unwrap();
        assert_abs_diff_eq!(pm.moment(3).unwrap(), 3.375, epsilon = 1e-15);
        let b = Distribution::bernoulli(0.3).unwrap();
        for m in 1..=6 {
            assert_eq!(b.moment(m).unwrap(), 0.3);
        }
    }

    #[test]
    fn quantile_examples() {
        assert_abs_diff_eq!(Distribution::normal(1.0, 1.0).unwrap().quantile(0.5), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exp(1.0).quantile(1.0 - (-1.0f64).exp()), 1.0, epsilon = 1e-12);
        assert_eq!(Distribution::point_mass(3.0).unwrap().quantile(0.2), 3.0);
    }

    #[test]
    fn generic_quantile_is_generalized_inverse() {
        let mix = Distribution::mixture(vec![
            (0.5, Distribution::point_mass(0.0).unwrap()),
            (0.5, exp(1.0)),
        ])
        .unwrap();
        assert_eq!(mix.quantile(0.3), 0.0);
        let q = mix.quantile(0.75);
        assert_abs_diff_eq!(q, 2.0f64.ln(), epsilon = 1e-9);
        let g = Distribution::gamma(2.0, 1.0).unwrap();
        for q in [0.01, 0.5, 0.99] {
            assert!(g.cdf(g.quantile(q)) >= q - 1e-12);
        }
    }

    #[test]
    fn affine_negation_keeps_atoms_right_continuous() {
        let b = Distribution::bernoulli(0.25).unwrap();
        let neg = Distribution::affine(b, -1.0, 0.0).unwrap();
        // -B takes -1 w.p. 0.25 and 0 w.p. 0.75
        assert_eq!(neg.cdf(-1.0), 0.25);
        assert_eq!(neg.cdf_left(-1.0), 0.0);
        assert_eq!(neg.cdf(-0.5), 0.25);
        assert_eq!(neg.cdf(0.0), 1.0);
        assert_eq!(neg.atoms(), vec![(-1.0, 0.25), (0.0, 0.75)]);
        assert_abs_diff_eq!(neg.mean(), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn mixture_weights_validated() {
        let bad = Distribution::mixture(vec![(0.5, exp(1.0)), (0.4, exp(2.0))]);
        assert!(matches!(bad, Err(Error::InvalidParameter { .. })));
        assert!(Distribution::mixture(vec![]).is_err());
    }

    #[test]
    fn invalid_parameters_name_field() {
        let e = Distribution::normal(0.0, -1.0).unwrap_err();
        assert!(e.to_string().contains("normal.variance"));
        assert!(Distribution::uniform(1.0, 1.0).is_err());
        assert!(Distribution::bernoulli(1.5).is_err());
    }

    #[test]
    fn sum_moment_binomial() {
        let parts = [exp(1.0), Distribution::bernoulli(0.5).unwrap()];
        // E[(X+B)^2] = E X^2 + 2 E X E B + E B = 2 + 1 + 0.5
        assert_abs_diff_eq!(sum_moment(&parts, 2).unwrap(), 3.5, epsilon = 1e-14);
    }

    #[test]
    fn integer_gamma_cdf_matches_incomplete_gamma() {
        for a in [1.0, 2.0, 3.0, 7.0] {
            for x in [1e-6, 0.1, 0.9, 2.5, 6.9, 7.1, 30.0] {
                let want = gamma_lr(a, x);
                let got = gamma_cdf(a, x);
                assert!((got - want).abs() <= 1e-14 + 1e-12 * want, "a={a} x={x}");
            }
        }
    }
}

//! Grid fallback: the laws of `X + Z` and `X · Z` by quadrature against
//! `dF_Z`, and `φ(X)` by monotone inversion.

use crate::config::ToleranceConfig;
use crate::distribution::{just_left_of, Distribution, GridCdf, Provenance};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_array, Tolerance};

use super::IncreasingMap;

const TOL: Tolerance = Tolerance {
    abs: 1e-11,
    rel: 1e-9,
    max_intervals: 64,
};

/// Truncated view of an operand.
struct Operand<'a> {
    d: &'a Distribution,
    lo: f64,
    hi: f64,
    atoms: Vec<(f64, f64)>,
    continuous_mass: f64,
    kinks: Vec<f64>,
}

impl<'a> Operand<'a> {
    fn new(d: &'a Distribution, cfg: &ToleranceConfig) -> Self {
        let (lo, hi) = d.truncated_support(cfg);
        let atoms = d.atoms();
        let continuous_mass = (1.0 - atoms.iter().map(|a| a.1).sum::<f64>()).max(0.0);
        Operand {
            d,
            lo,
            hi,
            atoms,
            continuous_mass,
            kinks: d.kinks(),
        }
    }

    /// Continuous part of `F` over `(a, b]`.
    fn continuous_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let jumps: f64 = self.atoms.iter().filter(|x| x.0 > a && x.0 <= b).map(|x| x.1).sum();
        (self.d.cdf(b) - self.d.cdf(a) - jumps).max(0.0)
    }

    fn quantiles(&self, n: usize, cfg: &ToleranceConfig) -> Vec<f64> {
        let (a, b) = (cfg.trunc_lo, cfg.trunc_hi);
        (0..n)
            .map(|i| self.d.quantile(a + (b - a) * i as f64 / (n - 1).max(1) as f64))
            .collect()
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn push_atom_points(pts: &mut Vec<f64>, atoms: &[(f64, f64)]) {
    for &(a, _) in atoms {
        pts.push(a);
        pts.push(just_left_of(a));
    }
}

fn finalize_points(mut pts: Vec<f64>) -> Vec<f64> {
    pts.retain(|t| t.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn merge_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.retain(|a| a.1 > 0.0);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (t, m) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == t => last.1 += m,
            _ => out.push((t, m)),
        }
    }
    out
}

fn sum_atoms(x: &Operand, z: &Operand) -> Vec<(f64, f64)> {
    merge_atoms(
        x.atoms
            .iter()
            .flat_map(|&(a, p)| z.atoms.iter().map(move |&(b, q)| (a + b, p * q)))
            .collect(),
    )
}

fn product_atoms(x: &Operand, z: &Operand) -> Vec<(f64, f64)> {
    let px0 = x.d.atom_mass_at(0.0);
    let pz0 = z.d.atom_mass_at(0.0);
    let mut atoms = vec![(0.0, px0 + pz0 - px0 * pz0)];
    for &(a, p) in x.atoms.iter().filter(|a| a.0 != 0.0) {
        for &(b, q) in z.atoms.iter().filter(|b| b.0 != 0.0) {
            atoms.push((a * b, p * q));
        }
    }
    merge_atoms(atoms)
}

fn flatten(d: &Distribution, sum: bool) -> Vec<Distribution> {
    if let Distribution::Grid(g) = d {
        match (g.provenance(), sum) {
            (Provenance::SumOf(parts), true) | (Provenance::ProductOf(parts), false) => {
                return parts.clone()
            }
            _ => {}
        }
    }
    vec![d.clone()]
}

/// Result grid for `X + Z`: uniform over the summed supports, comonotone
/// quantile sums, and every result atom.
pub(super) fn sum_points(x: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> Vec<f64> {
    let (ox, oz) = (Operand::new(x, cfg), Operand::new(z, cfg));
    let half = (cfg.grid_size / 2).max(2);
    let mut pts = uniform(ox.lo + oz.lo, ox.hi + oz.hi, half);
    let (qx, qz) = (ox.quantiles(half, cfg), oz.quantiles(half, cfg));
    pts.extend(qx.iter().zip(&qz).map(|(a, b)| a + b));
    push_atom_points(&mut pts, &sum_atoms(&ox, &oz));
    finalize_points(pts)
}

/// Result grid for `X · Z` with `Z >= 0`: uniform over the product range,
/// quantile products, a geometric cluster at zero, and every result atom.
pub(super) fn product_points(x: &Distribution, z: &Distribution, cfg: &ToleranceConfig) -> Vec<f64> {
    let (ox, oz) = (Operand::new(x, cfg), Operand::new(z, cfg));
    let zl = oz.lo.max(0.0);
    let corners = [ox.lo * zl, ox.lo * oz.hi, ox.hi * zl, ox.hi * oz.hi];
    let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = (cfg.grid_size / 2).max(2);
    let mut pts = uniform(lo, hi, half);
    let quarter = (half / 2).max(2);
    let (qx, qz) = (ox.quantiles(quarter, cfg), oz.quantiles(quarter, cfg));
    pts.extend(qx.iter().zip(&qz).map(|(a, b)| a * b));
    pts.extend(qx.iter().zip(qz.iter().rev()).map(|(a, b)| a * b));
    let reach = lo.abs().max(hi.abs());
    for k in 0..40 {
        let t = reach * 10f64.powf(-(k as f64) / 4.0);
        if t > 0.0 {
            if hi > 0.0 {
                pts.push(t.min(hi));
            }
            if lo < 0.0 {
                pts.push((-t).max(lo));
            }
        }
    }
    pts.push(0.0_f64.clamp(lo, hi));
    push_atom_points(&mut pts, &product_atoms(&ox, &oz));
    finalize_points(pts)
}

fn breaks_in(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut b = vec![lo, hi];
    b.extend(extra.into_iter().filter(|&t| t.is_finite() && t > lo && t < hi));
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() && v >= 0.0 {
        v
    } else {
        0.0
    }
}

/// Rough relative cost of one cdf evaluation.
fn cdf_cost(d: &Distribution) -> u8 {
    match d {
        Distribution::Gamma { shape, .. } if shape.fract() != 0.0 => 2,
        Distribution::Gamma { .. } | Distribution::Normal { .. } => 1,
        Distribution::Affine { base, .. } => cdf_cost(base),
        Distribution::Mixture(cs) => cs.iter().map(|(_, c)| cdf_cost(c)).max().unwrap_or(0),
        _ => 0,
    }
}

/// Law of `X + Z` tabulated at `points`.
pub(super) fn sum_on(
    x: &Distribution,
    z: &Distribution,
    points: &[f64],
    cfg: &ToleranceConfig,
) -> Result<Distribution> {
    let (mut ox, mut oz) = (Operand::new(x, cfg), Operand::new(z, cfg));
    // integrate against the continuous operand, keeping the cheaper cdf inside
    let swap = if oz.continuous_mass == 0.0 || ox.continuous_mass == 0.0 {
        oz.continuous_mass == 0.0 && ox.continuous_mass > 0.0
    } else {
        cdf_cost(ox.d) > cdf_cost(oz.d)
    };
    if swap {
        std::mem::swap(&mut ox, &mut oz);
    }
    let atoms = sum_atoms(&ox, &oz);
    let mut cdf = Vec::with_capacity(points.len());
    let mut dens = Vec::with_capacity(points.len());
    for &t in points {
        let mut f: f64 = oz.atoms.iter().map(|&(b, q)| q * ox.d.cdf(t - b)).sum();
        let mut g: f64 = oz
            .atoms
            .iter()
            .map(|&(b, q)| q * ox.d.continuous_pdf(t - b))
            .sum::<f64>()
            + ox.atoms
                .iter()
                .map(|&(a, p)| p * oz.d.continuous_pdf(t - a))
                .sum::<f64>();
        if oz.continuous_mass > 0.0 {
            let extra = oz
                .kinks
                .iter()
                .copied()
                .chain([t - ox.hi, t - ox.lo])
                .chain(ox.kinks.iter().map(|k| t - k));
            // F_X(t - s) is (numerically) 1 below t - hi_X and 0 above t - lo_X
            let a = oz.lo.max(t - ox.hi);
            let b = oz.hi.min(t - ox.lo);
            f += oz.continuous_between(oz.lo, a.min(oz.hi));
            if a < b {
                let breaks = breaks_in(a, b, extra);
                let with_density = ox.continuous_mass > 0.0;
                let v = integrate_array(
                    |s| {
                        let pz = oz.d.continuous_pdf(s);
                        let px = if with_density { ox.d.continuous_pdf(t - s) } else { 0.0 };
                        [ox.d.cdf(t - s) * pz, px * pz]
                    },
                    &breaks,
                    TOL,
                );
                f += v[0].value;
                g += v[1].value;
            }
        }
        cdf.push(f);
        dens.push(finite_or_zero(g));
    }
    let parts = [flatten(x, true), flatten(z, true)].concat();
    assemble(points, cdf, Some(dens), &atoms, Provenance::SumOf(parts), cfg)
}

/// Splits `[zl, zh]` for the integrand `F_X(t / s)`: returns the active
/// range where it is neither 0 nor 1, and the range where it is 1.
fn product_active(t: f64, xl: f64, xh: f64, zl: f64, zh: f64) -> (f64, f64, Option<(f64, f64)>) {
    let clamp = |v: f64| v.clamp(zl, zh);
    if t > 0.0 {
        // t / s decreases in s: 1 while s < t / xh, 0 once s > t / xl
        let c = if xh > 0.0 { clamp(t / xh) } else { zh };
        let d = if xl > 0.0 { clamp(t / xl) } else { zh };
        (c, d, Some((zl, c)))
    } else if t < 0.0 {
        // t / s increases in s: 0 while s < t / xl, 1 once s > t / xh
        let c = if xl < 0.0 { clamp(t / xl) } else { zh };
        let d = if xh < 0.0 { clamp(t / xh) } else { zh };
        (c, d, Some((d, zh)))
    } else {
        (zl, zh, None)
    }
}

/// Law of `X · Z` tabulated at `points`; `Z` must be nonnegative.
pub(super) fn product_on(
    x: &Distribution,
    z: &Distribution,
    points: &[f64],
    cfg: &ToleranceConfig,
) -> Result<Distribution> {
    let (ox, oz) = (Operand::new(x, cfg), Operand::new(z, cfg));
    let atoms = product_atoms(&ox, &oz);
    let q0 = z.atom_mass_at(0.0);
    let zl = oz.lo.max(0.0);
    let mut cdf = Vec::with_capacity(points.len());
    let mut dens = Vec::with_capacity(points.len());
    for &t in points {
        let mut f = if t >= 0.0 { q0 } else { 0.0 };
        let mut g = 0.0;
        for &(b, q) in oz.atoms.iter().filter(|b| b.0 > 0.0) {
            f += q * ox.d.cdf(t / b);
            g += q * ox.d.continuous_pdf(t / b) / b;
        }
        for &(a, p) in ox.atoms.iter().filter(|a| a.0 != 0.0) {
            g += p * oz.d.continuous_pdf(t / a) / a.abs();
        }
        if oz.continuous_mass > 0.0 && oz.hi > zl {
            let extra = oz
                .kinks
                .iter()
                .copied()
                .chain([t / ox.hi, t / ox.lo])
                .chain(ox.kinks.iter().filter(|&&k| k != 0.0).map(|k| t / k));
            let (a, b, one) = product_active(t, ox.lo, ox.hi, zl, oz.hi);
            f += one.map_or(0.0, |(c, d)| oz.continuous_between(c, d));
            if a < b {
                let breaks = breaks_in(a, b, extra);
                let with_density = ox.continuous_mass > 0.0 && t != 0.0;
                let v = integrate_array(
                    |s| {
                        let pz = oz.d.continuous_pdf(s);
                        let px = if with_density { ox.d.continuous_pdf(t / s) / s } else { 0.0 };
                        [ox.d.cdf(t / s) * pz, px * pz]
                    },
                    &breaks,
                    TOL,
                );
                f += v[0].value;
                g += v[1].value;
            }
        }
        cdf.push(f);
        dens.push(finite_or_zero(g));
    }
    let parts = [flatten(x, false), flatten(z, false)].concat();
    assemble(points, cdf, Some(dens), &atoms, Provenance::ProductOf(parts), cfg)
}

/// Law of `φ(X)` from the pre-image knots: `F_{φ(X)}(φ(q)) = F_X(q)`.
pub(super) fn map_on(
    x: &Distribution,
    map: &dyn IncreasingMap,
    preimage: &[f64],
    cfg: &ToleranceConfig,
) -> Result<Distribution> {
    let mut pts = Vec::with_capacity(preimage.len());
    for w in preimage.windows(2) {
        let (a, b) = (map.apply(w[0]), map.apply(w[1]));
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::param("map", format!("non-finite image of {}", w[1])));
        }
        if b <= a {
            return Err(Error::NotIncreasing { lo: w[0], hi: w[1] });
        }
    }
    pts.extend(preimage.iter().map(|&q| map.apply(q)));
    let cdf: Vec<f64> = preimage.iter().map(|&q| x.cdf(q)).collect();
    let atoms: Vec<(f64, f64)> = x
        .atoms()
        .into_iter()
        .map(|(a, p)| (map.apply(a), p))
        .collect();
    assemble(&pts, cdf, None, &atoms, Provenance::Tabulated, cfg)
}

fn assemble(
    points: &[f64],
    mut cdf: Vec<f64>,
    density: Option<Vec<f64>>,
    atoms: &[(f64, f64)],
    provenance: Provenance,
    cfg: &ToleranceConfig,
) -> Result<Distribution> {
    let n = points.len();
    if n == 0 {
        return Err(Error::param("grid.points", "must be nonempty"));
    }
    let mut running = 0.0_f64;
    for v in cdf.iter_mut() {
        running = running.max(v.clamp(0.0, 1.0));
        *v = running;
    }
    let flags: Vec<bool> = points
        .iter()
        .map(|t| atoms.iter().any(|a| a.0 == *t))
        .collect();
    if !flags[0] && cdf[0] <= 10.0 * cfg.trunc_lo {
        cdf[0] = 0.0;
    }
    cdf[n - 1] = 1.0;
    let mut grid = GridCdf::new(points.to_vec(), cdf, flags)?;
    if let Some(d) = density {
        grid = grid.with_density(d)?;
    }
    Ok(Distribution::Grid(grid.with_provenance(provenance)))
}

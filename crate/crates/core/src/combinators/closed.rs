//! Closed-form dispatch. Each function returns `None` when the pair has no
//! exact representation, in which case the caller falls back to quadrature.

use crate::distribution::Distribution;

/// `X + c`.
pub fn shift(x: &Distribution, c: f64) -> Distribution {
    if c == 0.0 {
        return x.clone();
    }
    match x {
        Distribution::PointMass { c: a } => Distribution::PointMass { c: a + c },
        Distribution::Normal { mean, variance } => Distribution::Normal {
            mean: mean + c,
            variance: *variance,
        },
        Distribution::Uniform { a, b } => Distribution::Uniform { a: a + c, b: b + c },
        Distribution::Mixture(cs) => {
            Distribution::Mixture(cs.iter().map(|(w, d)| (*w, shift(d, c))).collect())
        }
        Distribution::Affine { base, scale, shift: h } => Distribution::Affine {
            base: base.clone(),
            scale: *scale,
            shift: h + c,
        },
        _ => Distribution::Affine {
            base: Box::new(x.clone()),
            scale: 1.0,
            shift: c,
        },
    }
}

/// `c X` for any real `c`.
pub fn scale_any(x: &Distribution, c: f64) -> Distribution {
    if c == 1.0 {
        return x.clone();
    }
    if c == 0.0 {
        return Distribution::PointMass { c: 0.0 };
    }
    match x {
        Distribution::PointMass { c: a } => Distribution::PointMass { c: a * c },
        Distribution::Bernoulli { p } => Distribution::Mixture(vec![
            (1.0 - p, Distribution::PointMass { c: 0.0 }),
            (*p, Distribution::PointMass { c }),
        ]),
        Distribution::Normal { mean, variance } => Distribution::Normal {
            mean: mean * c,
            variance: variance * c * c,
        },
        Distribution::Exponential { rate } if c > 0.0 => Distribution::Exponential { rate: rate / c },
        Distribution::Gamma { shape, rate } if c > 0.0 => Distribution::Gamma {
            shape: *shape,
            rate: rate / c,
        },
        Distribution::Uniform { a, b } => {
            let (u, v) = (a * c, b * c);
            Distribution::Uniform {
                a: u.min(v),
                b: u.max(v),
            }
        }
        Distribution::Mixture(cs) => {
            Distribution::Mixture(cs.iter().map(|(w, d)| (*w, scale_any(d, c))).collect())
        }
        Distribution::Affine { base, scale, shift } => {
            if scale * c == 1.0 && shift * c == 0.0 {
                (**base).clone()
            } else {
                Distribution::Affine {
                    base: base.clone(),
                    scale: scale * c,
                    shift: shift * c,
                }
            }
        }
        _ => Distribution::Affine {
            base: Box::new(x.clone()),
            scale: c,
            shift: 0.0,
        },
    }
}

fn gamma_parts(d: &Distribution) -> Option<(f64, f64)> {
    match d {
        Distribution::Exponential { rate } => Some((1.0, *rate)),
        Distribution::Gamma { shape, rate } => Some((*shape, *rate)),
        _ => None,
    }
}

fn distribute(
    cs: &[(f64, Distribution)],
    other: &Distribution,
    op: fn(&Distribution, &Distribution) -> Option<Distribution>,
) -> Option<Distribution> {
    let mut out = Vec::with_capacity(cs.len());
    for (w, d) in cs {
        out.push((*w, op(d, other)?));
    }
    Some(Distribution::Mixture(out))
}

/// Exact law of `X + Z` for independent operands, if one is known.
pub fn sum(x: &Distribution, z: &Distribution) -> Option<Distribution> {
    match (x, z) {
        (_, Distribution::PointMass { c }) => Some(shift(x, *c)),
        (Distribution::PointMass { c }, _) => Some(shift(z, *c)),
        (
            Distribution::Normal { mean: m1, variance: v1 },
            Distribution::Normal { mean: m2, variance: v2 },
        ) => Some(Distribution::Normal {
            mean: m1 + m2,
            variance: v1 + v2,
        }),
        (_, Distribution::Bernoulli { p }) => Some(Distribution::Mixture(vec![
            (1.0 - p, x.clone()),
            (*p, shift(x, 1.0)),
        ])),
        (Distribution::Bernoulli { .. }, _) => sum(z, x),
        (Distribution::Mixture(cs), _) => distribute(cs, z, sum),
        (_, Distribution::Mixture(cs)) => {
            let mut out = Vec::with_capacity(cs.len());
            for (w, d) in cs {
                out.push((*w, sum(x, d)?));
            }
            Some(Distribution::Mixture(out))
        }
        _ => match (gamma_parts(x), gamma_parts(z)) {
            (Some((a, r1)), Some((b, r2))) if r1 == r2 => Some(Distribution::Gamma {
                shape: a + b,
                rate: r1,
            }),
            _ => None,
        },
    }
}

/// Exact law of `X · Z` for independent operands with `Z >= 0`, if known.
pub fn product(x: &Distribution, z: &Distribution) -> Option<Distribution> {
    let zero = || Distribution::PointMass { c: 0.0 };
    match (x, z) {
        (_, Distribution::PointMass { c }) => Some(scale_any(x, *c)),
        (Distribution::PointMass { c }, _) => Some(scale_any(z, *c)),
        (_, Distribution::Bernoulli { p }) => {
            Some(Distribution::Mixture(vec![(1.0 - p, zero()), (*p, x.clone())]))
        }
        (Distribution::Bernoulli { p }, _) => {
            Some(Distribution::Mixture(vec![(1.0 - p, zero()), (*p, z.clone())]))
        }
        (Distribution::Mixture(cs), _) => distribute(cs, z, product),
        (_, Distribution::Mixture(cs)) => {
            let mut out = Vec::with_capacity(cs.len());
            for (w, d) in cs {
                out.push((*w, product(x, d)?));
            }
            Some(Distribution::Mixture(out))
        }
        _ => None,
    }
}

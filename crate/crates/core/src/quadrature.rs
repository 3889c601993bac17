//! Globally adaptive Gauss-Kronrod (7/15) integration over finite intervals,
//! optionally split at caller-supplied breakpoints (kinks, jumps).

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-11,
            rel: 1e-10,
            max_intervals: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    // on tiny segments a node can round onto an endpoint singularity
    let f = |x: f64| match f(x) {
        v if v.is_infinite() && (x <= a || x >= b) => 0.0,
        v => v,
    };
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrate `f` from the first to the last breakpoint; interior breakpoints
/// seed the initial partition. Breakpoints must be sorted.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Estimate {
    let mut segs: Vec<Segment> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    if segs.is_empty() {
        return Estimate {
            value: 0.0,
            error: 0.0,
        };
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if err <= tol.abs.max(tol.rel * total.abs()) || segs.len() >= tol.max_intervals {
            return Estimate { value: total, error: err };
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval below floating-point resolution
            segs.push(Segment { error: 0.0, ..s });
            continue;
        }
        segs.push(gk15(&f, s.a, mid));
        segs.push(gk15(&f, mid, s.b));
    }
}

#[derive(Clone, Copy)]
struct ArraySegment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

fn gk15_array<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> ArraySegment<N> {
    let f = |x: f64| {
        let v = f(x);
        if x <= a || x >= b {
            v.map(|c| if c.is_infinite() { 0.0 } else { c })
        } else {
            v
        }
    };
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc.map(|v| v * WGK[7]);
    let mut gauss = fc.map(|v| v * WG[3]);
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let (l, r) = (f(center - dx), f(center + dx));
        for i in 0..N {
            let s = l[i] + r[i];
            kronrod[i] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * s;
            }
        }
    }
    let mut error = [0.0; N];
    for i in 0..N {
        error[i] = ((kronrod[i] - gauss[i]) * half).abs();
    }
    ArraySegment {
        a,
        b,
        value: kronrod.map(|k| k * half),
        error,
    }
}

/// `N` integrals of one integrand evaluation, refined on a common partition
/// until every component meets `tol`.
pub fn integrate_array<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    breaks: &[f64],
    tol: Tolerance,
) -> [Estimate; N] {
    let mut segs: Vec<ArraySegment<N>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15_array(&f, w[0], w[1]))
        .collect();
    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        for s in &segs {
            for i in 0..N {
                total[i] += s.value[i];
                err[i] += s.error[i];
            }
        }
        let target = total.map(|t| tol.abs.max(tol.rel * t.abs()));
        if (0..N).all(|i| err[i] <= target[i]) || segs.len() >= tol.max_intervals {
            let mut out = [Estimate { value: 0.0, error: 0.0 }; N];
            for i in 0..N {
                out[i] = Estimate {
                    value: total[i],
                    error: err[i],
                };
            }
            return out;
        }
        let score = |s: &ArraySegment<N>| {
            (0..N)
                .map(|i| {
                    if target[i] > 0.0 {
                        s.error[i] / target[i]
                    } else if s.error[i] > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max)
        };
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| score(x.1).total_cmp(&score(y.1)))
            .expect("nonempty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            segs.push(ArraySegment { error: [0.0; N], ..s });
            continue;
        }
        segs.push(gk15_array(&f, s.a, mid));
        segs.push(gk15_array(&f, mid, s.b));
    }
}

/// Five-point Gauss-Legendre rule on `[a, b]`; exact for polynomials of degree <= 9.
pub fn gauss_legendre5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const X: [f64; 3] = [0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W: [f64; 3] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = W[0] * f(c);
    for i in 1..3 {
        acc += W[i] * (f(c - h * X[i]) + f(c + h * X[i]));
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| 3.0 * x * x, 0.0, 2.0, Tolerance::default());
        assert!((e.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail() {
        let e = integrate(|x| (-x).exp(), 0.0, 40.0, Tolerance::default());
        assert!((e.value - (1.0 - (-40.0f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn jump_with_breakpoint() {
        let step = |x: f64| if x < 0.3 { 0.0 } else { 1.0 };
        let e = integrate_with_breaks(step, &[0.0, 0.3, 1.0], Tolerance::default());
        assert!((e.value - 0.7).abs() < 1e-14);
    }

    #[test]
    fn kink_converges_without_breakpoint() {
        let e = integrate(|x: f64| x.abs(), -1.0, 2.0, Tolerance::default());
        assert!((e.value - 2.5).abs() < 1e-9);
    }

    #[test]
    fn vector_matches_separate_integrals() {
        let v = integrate_array(
            |x: f64| [(-x).exp(), x.sqrt()],
            &[0.0, 1.0, 3.0],
            Tolerance::default(),
        );
        assert!((v[0].value - (1.0 - (-3.0f64).exp())).abs() < 1e-11);
        assert!((v[1].value - 2.0 * 3.0f64.powf(1.5) / 3.0).abs() < 1e-9);
    }

    #[test]
    fn legendre_degree_nine() {
        let v = gauss_legendre5(|x| x.powi(9) + x.powi(4), -1.0, 1.0);
        assert!((v - 0.4).abs() < 1e-14);
    }
}

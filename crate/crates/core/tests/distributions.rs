use proptest::prelude::*;
use stochord_core::quadrature::{integrate_with_breaks, Tolerance};
use stochord_core::{Density, Distribution, ToleranceConfig};

fn exp(rate: f64) -> Distribution {
    Distribution::exponential(rate).unwrap()
}

fn law() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.2f64..5.0).prop_map(exp),
        (0.5f64..5.0, 0.3f64..3.0).prop_map(|(k, r)| Distribution::gamma(k, r).unwrap()),
        (-2.0f64..2.0, 0.1f64..3.0).prop_map(|(m, v)| Distribution::normal(m, v).unwrap()),
        (-1.0f64..2.0, 0.1f64..3.0).prop_map(|(a, w)| Distribution::uniform(a, a + w).unwrap()),
        (0.05f64..0.95).prop_map(|p| Distribution::bernoulli(p).unwrap()),
        (-3.0f64..3.0).prop_map(|c| Distribution::point_mass(c).unwrap()),
        (0.1f64..0.9, 0.3f64..3.0, 0.0f64..2.0).prop_map(|(w, r, c)| {
            Distribution::mixture(vec![(w, exp(r)), (1.0 - w, Distribution::point_mass(c).unwrap())]).unwrap()
        }),
        (0.2f64..3.0, -2.0f64..2.0).prop_map(|(a, b)| Distribution::affine(exp(1.0), a, b).unwrap()),
    ]
}

fn probe_points(d: &Distribution, cfg: &ToleranceConfig) -> Vec<f64> {
    let (lo, hi) = d.truncated_support(cfg);
    let mut ts: Vec<f64> = (0..=64).map(|i| lo - 1.0 + (hi - lo + 2.0) * i as f64 / 64.0).collect();
    ts.extend(d.atoms().iter().map(|a| a.0));
    ts.sort_by(f64::total_cmp);
    ts
}

#[test]
fn family_examples() {
    let n = Distribution::normal(0.0, 1.0).unwrap();
    assert!((n.cdf(0.0) - 0.5).abs() < 1e-15);
    assert!((n.quantile(0.975) - 1.959963984540054).abs() < 1e-9);

    let b = Distribution::bernoulli(0.3).unwrap();
    assert_eq!(b.cdf(0.0), 0.7);
    assert_eq!(b.cdf_left(0.0), 0.0);
    assert!(matches!(b.pdf(1.0).unwrap(), Density::AtomMass(m) if (m - 0.3).abs() < 1e-15));

    let e = exp(2.0);
    assert!((e.hazard(3.0, 1e-12).unwrap() - 2.0).abs() < 1e-12);
    assert!(b.hazard(0.0, 1e-12).is_err());

    let g = Distribution::gamma(3.0, 2.0).unwrap();
    assert!((g.mean() - 1.5).abs() < 1e-15);
    assert!((g.variance() - 0.75).abs() < 1e-15);
    assert!(Distribution::gamma(0.0, 1.0).is_err());
    assert!(Distribution::uniform(1.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_monotone_and_complements_survival(d in law()) {
        let cfg = ToleranceConfig::default();
        let ts = probe_points(&d, &cfg);
        for w in ts.windows(2) {
            prop_assert!(d.cdf(w[0]) <= d.cdf(w[1]));
        }
        for &t in &ts {
            let f = d.cdf(t);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((d.survival(t) + f - 1.0).abs() <= 1e-12);
            prop_assert!(d.cdf_left(t) <= f);
            prop_assert!((f - d.cdf_left(t) - d.atom_mass_at(t)).abs() <= 1e-12, "t={}", t);
        }
        let (lo, hi) = d.truncated_support(&cfg);
        prop_assert!(d.cdf(hi) - d.cdf_left(lo) >= 1.0 - 1e-6);
    }

    #[test]
    fn hazard_times_survival_is_density(d in law()) {
        let cfg = ToleranceConfig::default();
        for t in probe_points(&d, &cfg) {
            if let (Ok(h), Ok(Density::Value(f))) = (d.hazard(t, 1e-9), d.pdf(t)) {
                prop_assert!((h * d.survival(t) - f).abs() <= 1e-8 * (1.0 + f), "t={}", t);
            }
        }
    }

    #[test]
    fn density_integrates_to_continuous_mass(d in law()) {
        let cfg = ToleranceConfig::default();
        let (lo, hi) = d.truncated_support(&cfg);
        let breaks = d.breakpoints_within(lo, hi);
        let tol = Tolerance { abs: 1e-12, rel: 1e-10, max_intervals: 500 };
        let mass = integrate_with_breaks(|t| d.continuous_pdf(t), &breaks, tol).value;
        prop_assert!((mass - (1.0 - d.total_atom_mass())).abs() <= 1e-4, "{}", mass);
    }

    #[test]
    fn closed_form_moments_match_quadrature(d in law(), m in 1u32..=5) {
        let cfg = ToleranceConfig::default();
        let closed = d.moment(m).unwrap();
        let numeric = d.moment_by_quadrature(m, &cfg);
        prop_assert!((closed - numeric).abs() <= 1e-4 * (1.0 + closed.abs()), "{} vs {}", closed, numeric);
    }

    #[test]
    fn quantile_is_a_generalized_inverse(d in law(), q in 0.01f64..0.99) {
        let t = d.quantile(q);
        prop_assert!(d.cdf(t) >= q - 1e-9);
        prop_assert!(d.cdf_left(t) <= q + 1e-9);
    }
}

use proptest::prelude::*;
use stochord_core::combinators::{product_of_independent, sum_of_independent};
use stochord_core::transform::{complete_monotonicity_check, laplace, phi_ratio, ExpRational, LaplaceRep};
use stochord_core::{Distribution, Location, Status, ToleranceConfig};

fn exp(rate: f64) -> Distribution {
    Distribution::exponential(rate).unwrap()
}

fn bernoulli_products() -> (Distribution, Distribution) {
    let cfg = ToleranceConfig::default();
    let z = Distribution::bernoulli(0.5).unwrap();
    (
        product_of_independent(&exp(1.0), &z, &cfg).unwrap(),
        product_of_independent(&exp(0.5), &z, &cfg).unwrap(),
    )
}

#[test]
fn transform_examples() {
    let cfg = ToleranceConfig::default();
    assert!((laplace(&exp(1.0), &cfg).eval(1.0) - 0.5).abs() < 1e-15);
    let zero = laplace(&Distribution::point_mass(0.0).unwrap(), &cfg);
    for s in [0.0, 1.0, 100.0] {
        assert_eq!(zero.eval(s), 1.0);
    }
    let b = laplace(&Distribution::bernoulli(0.5).unwrap(), &cfg);
    for s in [0.1, 1.0, 7.0] {
        assert!((b.eval(s) - (0.5 + 0.5 * (-s).exp())).abs() < 1e-15);
    }
}

#[test]
fn product_ratio_after_conditioning() {
    let cfg = ToleranceConfig::default();
    let (xz, yz) = bernoulli_products();
    let phi = phi_ratio(&xz, &yz, &cfg).unwrap();
    let r = phi.simplified().expect("rational");
    // (s² + 2s + 1) / (s² + 2.5s + 1)
    let (n, d) = (r.numer().coeffs(), r.denom().coeffs());
    let scale = d[0];
    let want_n = [1.0, 2.0, 1.0];
    let want_d = [1.0, 2.5, 1.0];
    for k in 0..3 {
        assert!((n[k] / scale - want_n[k]).abs() < 1e-10);
        assert!((d[k] / scale - want_d[k]).abs() < 1e-10);
    }

    let closed_prime = |s: f64| 0.5 * (s * s - 1.0) / (s * s + 2.5 * s + 1.0).powi(2);
    let d1 = phi.derivative(1);
    for s in [0.5, 2.0] {
        assert!((d1.eval(s).unwrap().value - closed_prime(s)).abs() < 1e-12);
    }
    assert!((closed_prime(0.5) + 0.06).abs() < 1e-12);
    assert!((closed_prime(2.0) - 0.015).abs() < 1e-12);

    let v = complete_monotonicity_check(&phi, &cfg);
    assert_eq!(v.status, Status::Violated);
    assert!(matches!(v.witness.unwrap().location, Location::Derivative { n: 1, s } if s > 1.0));
}

#[test]
fn identical_laws_have_unit_ratio() {
    let cfg = ToleranceConfig::default();
    for d in [exp(3.0), Distribution::uniform(0.0, 1.0).unwrap(), Distribution::bernoulli(0.2).unwrap()] {
        let phi = phi_ratio(&d, &d, &cfg).unwrap();
        for s in [1e-3, 1.0, 1e3] {
            assert!((phi.eval(s) - 1.0).abs() < 1e-12);
        }
        for n in 1..=4 {
            assert!(phi.derivative(n).eval(0.7).unwrap().value.abs() < 1e-12);
        }
        assert!(complete_monotonicity_check(&phi, &cfg).is_holds());
    }
}

#[test]
fn symbolic_and_finite_difference_derivatives_agree() {
    let cfg = ToleranceConfig::default();
    let (xz, yz) = bernoulli_products();
    let pairs = [(exp(1.0), exp(0.5)), (xz, yz), (exp(2.0), Distribution::gamma(3.0, 1.5).unwrap())];
    for (x, y) in &pairs {
        let phi = phi_ratio(x, y, &cfg).unwrap();
        assert!(phi.simplified().is_some());
        for n in 1..=4 {
            let d = phi.derivative(n);
            for s in [0.1, 1.0, 10.0] {
                let exact = d.eval(s).unwrap();
                let Ok(fd) = d.finite_difference(s) else {
                    // differences cannot resolve a sign change
                    assert!(exact.value.abs() < 1e-6, "n={n} s={s}: {exact:?}");
                    continue;
                };
                let slack = exact.error + fd.error + 1e-9 * exact.value.abs();
                assert!((exact.value - fd.value).abs() <= slack, "n={n} s={s}: {exact:?} vs {fd:?}");
            }
        }
    }
}

#[test]
fn delayed_ratio_of_shifted_law() {
    let cfg = ToleranceConfig::default();
    let x = exp(1.0);
    let y = Distribution::affine(exp(1.0), 1.0, 2.0).unwrap();
    let phi = phi_ratio(&x, &y, &cfg).unwrap();
    assert!(phi.is_exact());
    for s in [0.01, 1.0, 10.0] {
        assert!((phi.eval(s) - (-2.0 * s).exp()).abs() < 1e-14);
        let d2 = phi.derivative(2).eval(s).unwrap().value;
        assert!((d2 - 4.0 * (-2.0 * s).exp()).abs() < 1e-12);
    }
    assert!(complete_monotonicity_check(&phi, &cfg).is_holds());
}

#[test]
fn exp_rational_arithmetic() {
    let b = ExpRational::constant(0.5).add(&ExpRational::delayed(0.5, 1.0));
    let sq = b.mul(&b);
    for s in [0.0, 0.3, 2.0] {
        assert!((sq.eval(s) - b.eval(s).powi(2)).abs() < 1e-15);
    }
    assert_eq!(b.min_delay(), 0.0);
    assert!((b.advance(-1.0).eval(1.0) - b.eval(1.0) / 1f64.exp()).abs() < 1e-15);
}

fn nonnegative_law() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|r| exp(r)),
        (1u32..5, 0.3f64..3.0).prop_map(|(k, r)| Distribution::gamma(k as f64, r).unwrap()),
        (0.05f64..0.95).prop_map(|p| Distribution::bernoulli(p).unwrap()),
        (0.0f64..3.0).prop_map(|c| Distribution::point_mass(c).unwrap()),
        (0.1f64..0.9, 0.2f64..4.0, 0.2f64..4.0)
            .prop_map(|(w, a, b)| Distribution::mixture(vec![(w, exp(a)), (1.0 - w, exp(b))]).unwrap()),
        (0.0f64..2.0, 0.1f64..3.0).prop_map(|(a, w)| Distribution::uniform(a, a + w).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transforms_start_at_one_and_decrease(d in nonnegative_law()) {
        let cfg = ToleranceConfig::default();
        let l = laplace(&d, &cfg);
        prop_assert!((l.eval(1e-9) - 1.0).abs() <= 1e-6);
        let degenerate = d.variance() == 0.0 && d.mean() == 0.0;
        let values: Vec<f64> = cfg.s_grid.iter().map(|&s| l.eval(s)).collect();
        for v in &values {
            prop_assert!(*v >= 0.0 && *v <= 1.0 + 1e-12);
        }
        if !degenerate {
            // strict decrease eventually drowns in rounding, e.g. 1 - p + p e^{-s}
            prop_assert!(values.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(values[values.len() - 1] < values[0]);
        }
    }

    #[test]
    fn exact_and_quadrature_forms_agree(d in nonnegative_law()) {
        let cfg = ToleranceConfig::default();
        let exact = laplace(&d, &cfg);
        prop_assume!(exact.is_exact() && d.is_absolutely_continuous());
        let LaplaceRep::Rational(_) = exact else { unreachable!() };
        let (lo, hi) = d.truncated_support(&cfg);
        let numeric = LaplaceRep::Quadrature(stochord_core::transform::QuadratureLaplace {
            dist: d.clone(),
            lo,
            hi,
        });
        for &s in &cfg.s_grid {
            prop_assert!((exact.eval(s) - numeric.eval(s)).abs() <= 1e-5, "s={}", s);
        }
    }

    #[test]
    fn adding_an_independent_summand_is_convolution_ordered(
        x in nonnegative_law(),
        u in nonnegative_law(),
    ) {
        let cfg = ToleranceConfig::default();
        let y = sum_of_independent(&x, &u, &cfg).unwrap();
        let phi = phi_ratio(&x, &y, &cfg).unwrap();
        let v = complete_monotonicity_check(&phi, &cfg);
        prop_assert!(v.status != Status::Violated, "{} vs {}: {:?}", x, y, v);
    }
}

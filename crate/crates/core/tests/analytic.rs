use approx::assert_abs_diff_eq;
use drivenjc::analytic::PhotonDistribution;
use drivenjc::error::Error;
use drivenjc::{
    inversion_series, inversion_thermal, inversion_undriven, lineshape_fock, lineshape_thermal, sweep_lineshape,
    FieldSpec, ModelParams, TruncationPolicy,
};
use proptest::prelude::*;

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn driven_params() -> impl Strategy<Value = ModelParams> {
    (0.1f64..3.0, 0.0f64..3.0, 0.0f64..1.0, 3.1f64..6.0, -3.0f64..3.0).prop_map(|(g, zeta, xi, omega_c, delta)| {
        ModelParams::new(omega_c, omega_c + delta, g, zeta, xi).unwrap()
    })
}

fn field() -> impl Strategy<Value = FieldSpec> {
    prop_oneof![
        (0.0f64..20.0).prop_map(|n_bar| FieldSpec::Thermal { n_bar }),
        (0usize..30).prop_map(|k| FieldSpec::Fock { k }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn starts_fully_excited(p in driven_params(), f in field()) {
        let s = inversion_series(&p, f, &[0.0], &policy()).unwrap();
        prop_assert!((s.values[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inversion_is_bounded_and_even_in_time(p in driven_params(), f in field(), t in 0.0f64..200.0) {
        let s = inversion_series(&p, f, &[-t, t], &policy()).unwrap();
        prop_assert!(s.values[1].abs() <= 1.0);
        prop_assert!((s.values[0] - s.values[1]).abs() < 1e-14);
    }

    #[test]
    fn lineshape_bounded_even_and_rising_in_detuning(
        f in field(),
        g in 0.1f64..3.0,
        alpha in 0.0f64..3.0,
        d in 0.0f64..15.0,
        step in 0.0f64..2.0,
    ) {
        let curve = sweep_lineshape(f, g, alpha, &[-d - step, -d, d, d + step], &policy()).unwrap();
        let w = &curve.values;
        for &v in w {
            prop_assert!((0.0..1.0).contains(&v));
        }
        prop_assert!((w[1] - w[2]).abs() <= 1e-14);
        prop_assert!((w[0] - w[3]).abs() <= 1e-14);
        prop_assert!(w[3] >= w[2]);
    }

    #[test]
    fn displaced_distribution_mean(f in field(), alpha in 0.0f64..3.0) {
        let dist = PhotonDistribution::displaced(f, alpha, &policy()).unwrap();
        let mean: f64 = dist.weights().iter().enumerate().map(|(m, p)| m as f64 * p).sum();
        let expected = match f {
            FieldSpec::Thermal { n_bar } => n_bar,
            FieldSpec::Fock { k } => k as f64,
        } + alpha * alpha;
        prop_assert!((mean - expected).abs() < 1e-8 * (1.0 + expected), "{mean} vs {expected}");
        prop_assert!((dist.captured() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn lineshape_depends_on_drive_only_through_alpha(
        n_bar in 0.0f64..10.0,
        g in 0.2f64..3.0,
        alpha in 0.0f64..2.0,
        d in 0.0f64..10.0,
    ) {
        let w = lineshape_thermal(g, alpha, n_bar, d, &policy()).unwrap();
        // g sets the detuning scale: W(g, delta) = W(1, delta / g).
        let w1 = lineshape_thermal(1.0, alpha, n_bar, d / g, &policy()).unwrap();
        prop_assert!((w - w1).abs() < 1e-12);
    }

    #[test]
    fn single_precision_tracks_double(p in driven_params(), n_bar in 0.0f64..5.0, t in 0.0f64..20.0) {
        let p32 = ModelParams::<f32>::new(
            p.omega_c() as f32, p.omega_eg() as f32, p.g() as f32, p.zeta() as f32, p.xi() as f32,
        ).unwrap();
        let v64 = inversion_thermal(&p, n_bar, t, &policy()).unwrap();
        let v32 = inversion_thermal(&p32, n_bar as f32, t as f32, &TruncationPolicy::default()).unwrap();
        prop_assert!((v64 - v32 as f64).abs() < 2e-3, "{v64} vs {v32}");
    }
}

#[test]
fn undriven_inversion_ignores_the_drive() {
    let driven = ModelParams::new(0.4, 0.9, 1.0, 0.7, 0.2).unwrap();
    let bare = driven.undriven();
    for t in [0.0, 1.0, 7.5, 31.0] {
        let a = inversion_undriven(&driven, 2.0, t, &policy()).unwrap();
        let b = inversion_thermal(&bare, 2.0, t, &policy()).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
    }
}

#[test]
fn resonant_vacuum_rabi() {
    let p = ModelParams::new(0.5, 0.5, 1.0, 0.0, 0.0).unwrap();
    for t in [0.0, 0.3, 2.0, 11.0] {
        assert_abs_diff_eq!(inversion_thermal(&p, 0.0, t, &policy()).unwrap(), (2.0 * t).cos(), epsilon = 1e-14);
    }
}

#[test]
fn detuned_fock_lineshape_closed_form() {
    for k in 0..6 {
        for d in [0.0, 0.5, 3.0] {
            let expected = d * d / (d * d + 4.0 * (k + 1) as f64);
            assert_abs_diff_eq!(lineshape_fock(1.0, 0.0, k, d, &policy()).unwrap(), expected, epsilon = 1e-14);
        }
    }
}

#[test]
fn frozen_reference_values() {
    // Independent term-by-term summation in double precision.
    let w = lineshape_thermal(1.0, 0.0, 0.1, 2.0, &policy()).unwrap();
    assert_abs_diff_eq!(w, 0.48411977847573, epsilon = 1e-12);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(matches!(lineshape_thermal(0.0, 0.5, 1.0, 1.0, &policy()), Err(Error::NonPositiveCoupling { .. })));
    assert!(matches!(FieldSpec::thermal(-1.0), Err(Error::NegativeRate { .. })));
    assert!(sweep_lineshape(FieldSpec::Fock { k: 0 }, 1.0, 0.0, &[], &policy()).is_err());
    assert!(sweep_lineshape(FieldSpec::Fock { k: 0 }, 1.0, 0.0, &[1.0, 0.0], &policy()).is_err());
    let tight = TruncationPolicy::new(1e-12, 16).unwrap();
    assert!(matches!(
        lineshape_thermal(1.0, 0.0, 15.0, 1.0, &tight),
        Err(Error::TruncationCapExceeded { at_delta: Some(_), .. })
    ));
}

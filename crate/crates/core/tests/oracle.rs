use approx::assert_abs_diff_eq;
use drivenjc::error::Error;
use drivenjc::oracle::{
    build_h_jc, build_h_lab, displacement_matrix, evolve_lab, evolve_transformed, inversion_numeric, time_average_numeric,
    LabHamiltonian, LabOptions, NumericOptions, Propagation, QuantumStateVector, TransformedPropagator, C64,
};
use drivenjc::{inversion_series, FieldSpec, InversionSeries, ModelParams, TruncationPolicy};
use nalgebra::DVector;

fn reference_set() -> ModelParams {
    ModelParams::new(0.4, 0.9, 1.0, 0.7, 0.2).unwrap()
}

fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn hamiltonians_are_hermitian() {
    let p = reference_set();
    for t in [0.0, 0.37, 5.0, 19.9] {
        let h = build_h_lab(&p, t, 30).unwrap();
        assert!(h.hermitian);
        assert!(h.hermiticity_residual() < 1e-15, "t = {t}");
    }
    assert!(build_h_jc(&p, 30).unwrap().hermiticity_residual() == 0.0);
}

#[test]
fn jc_spectrum_is_dressed_doublets() {
    let p = reference_set();
    let d = p.derived();
    let n = 25;
    let eig = build_h_jc(&p, n).unwrap().eigh().unwrap();
    let mut expected = vec![-0.5 * d.delta_eg, d.delta_c * (n - 1) as f64 + 0.5 * d.delta_eg];
    for j in 0..n - 1 {
        let centre = d.delta_c * (j as f64 + 0.5);
        let split = (0.25 * d.delta * d.delta + p.g() * p.g() * (j + 1) as f64).sqrt();
        expected.push(centre + split);
        expected.push(centre - split);
    }
    expected.sort_by(f64::total_cmp);
    let mut got: Vec<f64> = eig.values.iter().copied().collect();
    got.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(&expected) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}

#[test]
fn displacement_is_unitary_and_makes_coherent_states() {
    let alpha = 1.3;
    let n = 60;
    let d = displacement_matrix(alpha, n).unwrap();
    assert!(!d.hermitian);
    assert!(d.eigh().is_err());
    // Unitarity of the truncated exponential is exact up to roundoff.
    assert!(d.unitarity_residual() < 1e-12);
    let mut coeff = (-0.5 * alpha * alpha).exp();
    for m in 0..15 {
        if m > 0 {
            coeff *= alpha / (m as f64).sqrt();
        }
        let z = d.matrix[(m, 0)];
        assert_abs_diff_eq!(z.re, coeff, epsilon = 1e-12);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        // Same block on the excited side.
        assert_eq!(d.matrix[(n + m, n)], z);
    }
}

#[test]
fn jc_propagator_is_unitary() {
    let eig = build_h_jc(&reference_set(), 20).unwrap().eigh().unwrap();
    let u = drivenjc::oracle::OperatorMatrix {
        matrix: eig.exp_i(-3.7),
        hermitian: false,
    };
    assert!(u.unitarity_residual() < 1e-12);
}

#[test]
fn matrix_free_rhs_matches_dense_hamiltonian() {
    let p = reference_set();
    let n = 12;
    let ham = LabHamiltonian::new(&p, n).unwrap();
    let psi: Vec<C64> = (0..2 * n).map(|i| C64::new((i as f64).sin(), (0.3 * i as f64).cos())).collect();
    let mut out = vec![C64::default(); 2 * n];
    for t in [0.0, 1.1, 7.3] {
        ham.apply_rhs(t, &psi, &mut out);
        let h = build_h_lab(&p, t, n).unwrap().matrix;
        let dense = &h * DVector::from_column_slice(&psi) * C64::new(0.0, -1.0);
        for (a, b) in out.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}

#[test]
fn undriven_vacuum_rabi_oscillation() {
    let p = ModelParams::new(0.5, 0.5, 1.0, 0.0, 0.0).unwrap();
    let times = grid(10.0, 201);
    let init = QuantumStateVector::excited_fock(0, 8).unwrap();
    for states in [
        evolve_lab(&p, &init, &times, &LabOptions::default()).unwrap(),
        evolve_transformed(&p, &init, &times).unwrap(),
    ] {
        for s in &states {
            assert_abs_diff_eq!(s.sigma_z(), (2.0 * s.time()).cos(), epsilon = 1e-9);
        }
    }
}

#[test]
fn lab_and_transformed_states_agree() {
    let p = reference_set();
    let times = grid(10.0, 101);
    let init = QuantumStateVector::excited_fock(2, 40).unwrap();
    let lab = evolve_lab(&p, &init, &times, &LabOptions::default()).unwrap();
    let exact = evolve_transformed(&p, &init, &times).unwrap();
    for (a, b) in lab.iter().zip(&exact) {
        assert!(1.0 - a.overlap_modulus(b) < 1e-9, "t = {}", a.time());
        assert_abs_diff_eq!(a.sigma_z(), b.sigma_z(), epsilon = 1e-9);
    }
}

#[test]
fn transformed_path_conserves_norm() {
    let p = reference_set();
    let init = QuantumStateVector::excited_fock(0, 40).unwrap();
    for s in evolve_transformed(&p, &init, &grid(50.0, 51)).unwrap() {
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let p = reference_set();
    let init = QuantumStateVector::excited_fock(0, 30).unwrap();
    let times = [0.0, 2.0];
    let exact = evolve_transformed(&p, &init, &times).unwrap()[1].clone();
    let error = |safety: f64| {
        let opts = LabOptions {
            step_safety: safety,
            norm_tol: 1.0,
            ..LabOptions::default()
        };
        let s = &evolve_lab(&p, &init, &times, &opts).unwrap()[1];
        (s.amplitudes() - exact.amplitudes()).norm()
    };
    let (coarse, fine) = (error(0.4), error(0.2));
    let ratio = coarse / fine;
    assert!(fine > 1e-12, "error {fine} too close to roundoff to measure order");
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio} (coarse {coarse}, fine {fine})");
}

#[test]
fn numeric_inversion_is_stable_in_the_cutoff() {
    let p = reference_set();
    let times = grid(20.0, 201);
    let field = FieldSpec::Thermal { n_bar: 0.5 };
    let run = |cutoff| {
        inversion_numeric(
            &p,
            field,
            &times,
            &NumericOptions {
                cutoff: Some(cutoff),
                propagation: Propagation::Transformed,
                ..NumericOptions::default()
            },
        )
        .unwrap()
        .values
    };
    assert!(sup(&run(45), &run(60)) < 1e-10);
}

#[test]
fn both_oracle_paths_match_the_closed_form() {
    let p = reference_set();
    let times = grid(20.0, 401);
    let field = FieldSpec::Fock { k: 2 };
    let analytic = inversion_series(&p, field, &times, &TruncationPolicy::default()).unwrap();
    for propagation in [Propagation::Lab, Propagation::Transformed] {
        let opts = NumericOptions {
            propagation,
            ..NumericOptions::default()
        };
        let numeric = inversion_numeric(&p, field, &times, &opts).unwrap();
        assert!(sup(&numeric.values, &analytic.values) < 1e-8, "{propagation:?}");
    }
}

#[test]
fn small_cutoff_reports_leakage() {
    let p = reference_set();
    let times = grid(5.0, 11);
    let init = QuantumStateVector::excited_fock(3, 5).unwrap();
    assert!(matches!(
        evolve_lab(&p, &init, &times, &LabOptions::default()),
        Err(Error::LeakageExceeded { cutoff: 5, .. })
    ));
    assert!(matches!(
        TransformedPropagator::new(&p, 5).unwrap().evolve(&init, &times),
        Err(Error::LeakageExceeded { .. })
    ));
    let opts = NumericOptions {
        cutoff: Some(4),
        ..NumericOptions::default()
    };
    assert!(matches!(
        inversion_numeric(&p, FieldSpec::Thermal { n_bar: 4.0 }, &times, &opts),
        Err(Error::LeakageExceeded { .. })
    ));
}

#[test]
fn invalid_states_and_grids_are_rejected() {
    assert!(matches!(QuantumStateVector::excited_fock(5, 5), Err(Error::CutoffTooSmall { .. })));
    assert!(matches!(QuantumStateVector::excited_fock(0, 1), Err(Error::CutoffTooSmall { .. })));
    let init = QuantumStateVector::excited_fock(0, 5).unwrap();
    assert!(evolve_lab(&reference_set(), &init, &[1.0, 0.5], &LabOptions::default()).is_err());
    assert!(evolve_transformed(&reference_set(), &init, &[f64::NAN]).is_err());
}

fn series(times: Vec<f64>, f: impl Fn(f64) -> f64) -> InversionSeries {
    let values = times.iter().map(|&t| f(t)).collect();
    InversionSeries {
        times,
        values,
        params: reference_set(),
        field: FieldSpec::Fock { k: 0 },
        truncation_report: Default::default(),
    }
}

#[test]
fn time_average_of_known_signals() {
    let s = series(grid(100.0, 20001), |_| 0.25);
    assert_abs_diff_eq!(time_average_numeric(&s, 100.0).unwrap(), 0.25, epsilon = 1e-15);
    // Mean of cos(2t) over [0, T] is sin(2T) / 2T.
    let s = series(grid(100.0, 20001), |t| (2.0 * t).cos());
    assert_abs_diff_eq!(time_average_numeric(&s, 100.0).unwrap(), (200.0f64).sin() / 200.0, epsilon = 1e-6);
    // A shorter window uses only the leading samples.
    let s = series(grid(100.0, 20001), |t| if t <= 50.0 { 1.0 } else { -1.0 });
    assert_abs_diff_eq!(time_average_numeric(&s, 50.0).unwrap(), 1.0, epsilon = 1e-15);
}

#[test]
fn time_average_rejects_thin_or_short_grids() {
    let few = series(grid(10.0, 999), |_| 1.0);
    assert!(matches!(time_average_numeric(&few, 10.0), Err(Error::InsufficientSamples { got: 999, .. })));
    let short = series(grid(10.0, 5000), |_| 1.0);
    assert!(matches!(time_average_numeric(&short, 20.0), Err(Error::InsufficientSamples { .. })));
    let shifted = series((1..=5000).map(|i| i as f64).collect(), |_| 1.0);
    assert!(time_average_numeric(&shifted, 100.0).is_err());
    let ok = series(grid(10.0, 5000), |_| 1.0);
    assert!(time_average_numeric(&ok, 0.0).is_err());
}

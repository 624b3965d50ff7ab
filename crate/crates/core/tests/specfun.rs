use approx::assert_abs_diff_eq;
use drivenjc::oracle::displacement_matrix;
use drivenjc::specfun::{displaced_number_overlap, displaced_thermal_weight, laguerre_assoc, OverlapTable};
use drivenjc::TruncationPolicy;
use proptest::prelude::*;

#[test]
fn overlaps_match_the_displacement_matrix() {
    for alpha in [0.3, 1.1] {
        let n = 80;
        let d = displacement_matrix(alpha, n).unwrap();
        for m in 0..25 {
            for k in 0..25 {
                let exact = d.matrix[(m, k)].norm_sqr();
                assert_abs_diff_eq!(displaced_number_overlap(m, k, alpha), exact, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn table_matches_pointwise_overlaps() {
    let table = OverlapTable::new(1.7, 60, 30);
    for m in (0..=60).step_by(7) {
        for k in (0..=30).step_by(5) {
            assert_abs_diff_eq!(table.get(m, k), displaced_number_overlap(m, k, 1.7), epsilon = 1e-15);
        }
    }
}

#[test]
fn zero_displacement_is_identity() {
    for m in 0..10 {
        for k in 0..10 {
            assert_eq!(displaced_number_overlap(m, k, 0.0), if m == k { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn displaced_vacuum_is_poisson() {
    let alpha: f64 = 1.5;
    let x = alpha * alpha;
    let mut poisson = (-x).exp();
    for m in 0..30 {
        if m > 0 {
            poisson *= x / m as f64;
        }
        assert_abs_diff_eq!(displaced_number_overlap(m, 0, alpha), poisson, epsilon = 1e-15);
        let policy = TruncationPolicy::default();
        assert_abs_diff_eq!(displaced_thermal_weight(m, 0.0, alpha, &policy).unwrap(), poisson, epsilon = 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_is_symmetric_and_bounded(m in 0usize..80, k in 0usize..80, alpha in 0.0f64..6.0) {
        let a = displaced_number_overlap(m, k, alpha);
        let b = displaced_number_overlap(k, m, alpha);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300) + 1e-300);
    }

    #[test]
    fn laguerre_three_term_identity(n in 2usize..60, a in 0usize..20, x in 0.0f64..40.0) {
        // (n) L_n = (2n - 1 + a - x) L_{n-1} - (n - 1 + a) L_{n-2}
        let (l0, l1, l2) = (laguerre_assoc(n - 2, a, x), laguerre_assoc(n - 1, a, x), laguerre_assoc(n, a, x));
        let lhs = n as f64 * l2;
        let rhs = (2.0 * n as f64 - 1.0 + a as f64 - x) * l1 - (n as f64 - 1.0 + a as f64) * l0;
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale * (n as f64));
    }
}

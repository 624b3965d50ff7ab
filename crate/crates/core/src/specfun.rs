//! Associated Laguerre polynomials and displaced number-state overlaps
//! `P(m|k; alpha) = |<m|D(alpha)|k>|^2` for real `alpha >= 0`.
//!
//! The overlaps are evaluated in log space with a rescaled forward
//! recurrence in the degree, so index gaps of several thousand neither
//! overflow nor underflow.

use crate::error::{Error, Result};
use crate::model::{ThermalWeights, TruncationPolicy};
use crate::num::Real;

/// `L_n^{(a)}(x)` by the three-term recurrence in the degree.
///
/// Overflows to infinity for large `n + a` at large `x`; use
/// [`laguerre_assoc_scaled`] there.
pub fn laguerre_assoc<T: Real>(n: usize, a: usize, x: T) -> T {
    let one = T::one();
    let a_t = T::of_usize(a);
    if n == 0 {
        return one;
    }
    let mut prev = one;
    let mut cur = one + a_t - x;
    for j in 1..n {
        let j_t = T::of_usize(j);
        let next = ((T::of(2.0) * j_t + one + a_t - x) * cur - (j_t + a_t) * prev) / (j_t + one);
        prev = cur;
        cur = next;
    }
    cur
}

/// A value represented as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub mantissa: T,
    pub log_scale: T,
}

impl<T: Real> Scaled<T> {
    /// `ln |value|`, `-inf` for an exact zero.
    pub fn ln_abs(&self) -> T {
        self.mantissa.abs().ln() + self.log_scale
    }

    pub fn value(&self) -> T {
        self.mantissa * self.log_scale.exp()
    }
}

/// Runs the degree recurrence for `L_0^{(a)}(x) ..= L_{n_max}^{(a)}(x)`,
/// calling `visit(n, value)` for each degree.
fn laguerre_sweep<T: Real>(n_max: usize, a: usize, x: T, mut visit: impl FnMut(usize, Scaled<T>)) {
    let one = T::one();
    let two = T::of(2.0);
    let a_t = T::of_usize(a);
    let threshold = T::rescale_threshold();
    let ln_threshold = threshold.ln();

    let mut log_scale = T::zero();
    let mut prev = T::zero();
    let mut cur = one;
    visit(0, Scaled { mantissa: cur, log_scale });
    for n in 0..n_max {
        let n_t = T::of_usize(n);
        let next = ((two * n_t + one + a_t - x) * cur - (n_t + a_t) * prev) / (n_t + one);
        prev = cur;
        cur = next;
        if cur.abs() > threshold {
            cur = cur / threshold;
            prev = prev / threshold;
            log_scale = log_scale + ln_threshold;
        }
        visit(n + 1, Scaled { mantissa: cur, log_scale });
    }
}

/// `L_n^{(a)}(x)` as a [`Scaled`] value that cannot overflow.
pub fn laguerre_assoc_scaled<T: Real>(n: usize, a: usize, x: T) -> Scaled<T> {
    let mut out = Scaled {
        mantissa: T::one(),
        log_scale: T::zero(),
    };
    laguerre_sweep(n, a, x, |j, v| {
        if j == n {
            out = v;
        }
    });
    out
}

/// Cumulative table of `ln n!`.
#[derive(Debug, Clone)]
pub struct LogFactorial<T> {
    table: Vec<T>,
}

impl<T: Real> LogFactorial<T> {
    pub fn new(n_max: usize) -> Self {
        let mut table = Vec::with_capacity(n_max + 1);
        let mut acc = T::zero();
        table.push(acc);
        for i in 1..=n_max {
            acc = acc + T::of_usize(i).ln();
            table.push(acc);
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, n: usize) -> T {
        self.table[n]
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Log of the prefactor `e^{-x} (n! / (n+d)!) x^d`, `x = alpha^2 > 0`.
#[inline]
fn log_prefactor<T: Real>(lf: &LogFactorial<T>, n: usize, d: usize, x: T, ln_x: T) -> T {
    let d_term = if d == 0 { T::zero() } else { T::of_usize(d) * ln_x };
    -x + lf.get(n) - lf.get(n + d) + d_term
}

/// Exponent below which an overlap is returned as zero without evaluating
/// its polynomial.
fn log_cutoff<T: Real>() -> T {
    T::min_tolerance().ln() - T::of(20.0)
}

/// `|<m|D(alpha)|k>|^2` for real `alpha >= 0`.
///
/// Uses the symmetric form
/// `e^{-x} (lo!/hi!) x^{hi-lo} [L_lo^{(hi-lo)}(x)]^2`, `x = alpha^2`,
/// `lo = min(m, k)`, `hi = max(m, k)`.
pub fn displaced_number_overlap<T: Real>(m: usize, k: usize, alpha: T) -> T {
    let x = alpha * alpha;
    if x == T::zero() {
        return if m == k { T::one() } else { T::zero() };
    }
    let (lo, hi) = if m <= k { (m, k) } else { (k, m) };
    let d = hi - lo;
    let ln_x = x.ln();
    let lf = LogFactorial::<T>::new(hi);

    // |L_n^{(a)}(x)| <= C(n + a, n) e^{x/2} bounds the whole product by
    // hi! x^d / (lo! d!^2).
    let ln_bound = lf.get(hi) - lf.get(lo) - T::of(2.0) * lf.get(d) + T::of_usize(d) * ln_x;
    if ln_bound < log_cutoff() {
        return T::zero();
    }
    let poly = laguerre_assoc_scaled(lo, d, x);
    if poly.mantissa == T::zero() {
        return T::zero();
    }
    let ln_p = log_prefactor(&lf, lo, d, x, ln_x) + T::of(2.0) * poly.ln_abs();
    ln_p.exp()
}

/// Dense table of `P(m|k; alpha)` for `m <= m_max`, `k <= k_max`.
///
/// Stored by index gap: `diagonals[d][n] = P(n + d | n)`, which by symmetry
/// is also `P(n | n + d)`. Each diagonal is one recurrence pass.
#[derive(Debug, Clone)]
pub struct OverlapTable<T = f64> {
    alpha: T,
    m_max: usize,
    k_max: usize,
    diagonals: Vec<Vec<T>>,
}

impl<T: Real> OverlapTable<T> {
    pub fn new(alpha: T, m_max: usize, k_max: usize) -> Self {
        let x = alpha * alpha;
        let d_max = m_max.max(k_max);
        let lf = LogFactorial::<T>::new(m_max + k_max + 1);
        let ln_x = x.ln();
        let mut diagonals = Vec::with_capacity(d_max + 1);
        for d in 0..=d_max {
            let lower = if d <= m_max { k_max.min(m_max - d) + 1 } else { 0 };
            let upper = if d >= 1 && d <= k_max { m_max.min(k_max - d) + 1 } else { 0 };
            let len = lower.max(upper);
            let mut diag = vec![T::zero(); len];
            if len == 0 {
                diagonals.push(diag);
                continue;
            }
            if x == T::zero() {
                if d == 0 {
                    diag.iter_mut().for_each(|v| *v = T::one());
                }
            } else {
                laguerre_sweep(len - 1, d, x, |n, poly| {
                    if poly.mantissa != T::zero() {
                        let ln_p = log_prefactor(&lf, n, d, x, ln_x) + T::of(2.0) * poly.ln_abs();
                        diag[n] = ln_p.exp();
                    }
                });
            }
            diagonals.push(diag);
        }
        Self {
            alpha,
            m_max,
            k_max,
            diagonals,
        }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn m_max(&self) -> usize {
        self.m_max
    }
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `P(m|k; alpha)`. Panics outside the table bounds.
    #[inline]
    pub fn get(&self, m: usize, k: usize) -> T {
        assert!(m <= self.m_max && k <= self.k_max, "({m}, {k}) outside overlap table");
        let (lo, d) = if m <= k { (m, k - m) } else { (k, m - k) };
        self.diagonals[d][lo]
    }

    /// Mass of column `k` captured by rows `0..=m_max`.
    pub fn column_sum(&self, k: usize) -> T {
        (0..=self.m_max).map(|m| self.get(m, k)).sum()
    }
}

/// Photon-number distribution of a displaced thermal state,
/// `P(m) = (1/(1+n)) sum_k (n/(1+n))^k P(m|k; alpha)`, at a single `m`.
pub fn displaced_thermal_weight<T: Real>(
    m: usize,
    n_bar: T,
    alpha: T,
    policy: &TruncationPolicy<T>,
) -> Result<T> {
    policy.validate()?;
    let len = ThermalWeights::terms_for(n_bar, policy.epsilon);
    if len > policy.max_terms {
        return Err(Error::TruncationCapExceeded {
            max_terms: policy.max_terms,
            captured: f64::NAN,
            at_delta: None,
        });
    }
    Ok(ThermalWeights::new(n_bar)
        .take(len)
        .enumerate()
        .map(|(k, w)| w * displaced_number_overlap(m, k, alpha))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    use num::{BigInt, BigRational, ToPrimitive};

    fn binomial(n: usize, k: usize) -> BigInt {
        (0..k).fold(BigInt::from(1), |acc, i| acc * (n - i) / (i + 1))
    }

    // explicit finite sum in exact rational arithmetic, independent of the
    // recurrence
    fn laguerre_series(n: usize, a: usize, x: (i64, i64)) -> f64 {
        let x = BigRational::new(x.0.into(), x.1.into());
        let mut sum = BigRational::from_integer(0.into());
        let mut power = BigRational::from_integer(1.into());
        let mut fact = BigInt::from(1);
        for i in 0..=n {
            if i > 0 {
                power *= &x;
                fact *= i;
            }
            let term = BigRational::from_integer(binomial(n + a, n - i)) * &power
                / BigRational::from_integer(fact.clone());
            if i % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        sum.to_f64().unwrap()
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(laguerre_assoc(0, 7, 3.3), 1.0);
        assert_relative_eq!(laguerre_assoc(1, 2, 0.49), 2.51, epsilon = 1e-15);
        let expect = laguerre_series(3, 1, (1, 2));
        assert_relative_eq!(laguerre_assoc(3, 1, 0.5), expect, max_relative = 1e-14);
        // L_3^{(1)}(x) = 4 - 6x + 2x^2 - x^3/6
        assert_relative_eq!(expect, 4.0 - 3.0 + 0.5 - 0.125 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn recurrence_matches_series() {
        let xs = [(0, 1), (3, 10), (49, 100), (17, 10), (5, 1), (25, 2), (25, 1)];
        for n in 0..=20 {
            for a in 0..=20 {
                for &x in &xs {
                    let want = laguerre_series(n, a, x);
                    let got = laguerre_assoc(n, a, x.0 as f64 / x.1 as f64);
                    let err = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
                    assert!(
                        err < 1e-10,
                        "L_{n}^({a})({x:?}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn scaled_matches_plain() {
        for &(n, a, x) in &[(5, 3, 0.49), (40, 12, 4.0), (100, 0, 900.0)] {
            let s = laguerre_assoc_scaled::<f64>(n, a, x);
            let p = laguerre_assoc::<f64>(n, a, x);
            assert_relative_eq!(s.value(), p, max_relative = 1e-12);
        }
        // large enough that the unscaled recurrence overflows
        let s = laguerre_assoc_scaled::<f64>(600, 3000, 900.0);
        assert!(s.ln_abs().is_finite() && s.ln_abs() > 720.0, "{}", s.ln_abs());
        assert!(!laguerre_assoc::<f64>(600, 3000, 900.0).is_finite());
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(displaced_number_overlap(3, 3, 0.0), 1.0);
        assert_eq!(displaced_number_overlap(3, 4, 0.0), 0.0);
        assert_relative_eq!(displaced_number_overlap(0, 0, 0.7), (-0.49f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(displaced_number_overlap(0, 0, 0.7), 0.6126264, epsilon = 1e-7);
        assert_relative_eq!(displaced_number_overlap(1, 0, 0.7), 0.3001869, epsilon = 1e-7);
    }

    #[test]
    fn overlap_is_symmetric() {
        for &alpha in &[0.1f64, 0.7, 2.0] {
            for m in 0..=60 {
                for k in 0..=60 {
                    let a = displaced_number_overlap(m, k, alpha);
                    let b = displaced_number_overlap(k, m, alpha);
                    assert!((a - b).abs() < 1e-14);
                    assert!(a >= 0.0);
                }
            }
        }
    }

    #[test]
    fn columns_normalize() {
        for &alpha in &[0.1f64, 0.7, 2.0] {
            for k in [0usize, 3, 10, 25, 40, 60] {
                // the spread of a displaced |k> grows like alpha * sqrt(k)
                let spread = if k > 25 { (4.0 * alpha * (k as f64).sqrt()).ceil() as usize } else { 0 };
                let m_max = k + 10 + (alpha * alpha + 10.0 * alpha + 10.0).ceil() as usize + spread;
                let sum: f64 = (0..=m_max).map(|m| displaced_number_overlap(m, k, alpha)).sum();
                assert!((sum - 1.0).abs() < 1e-10, "alpha {alpha} k {k}: {sum}");
            }
        }
    }

    #[test]
    fn table_agrees_with_pointwise() {
        let table = OverlapTable::new(2.0, 50, 20);
        for m in 0..=50 {
            for k in 0..=20 {
                let want: f64 = displaced_number_overlap(m, k, 2.0);
                assert!((table.get(m, k) - want).abs() < 1e-14, "({m},{k})");
            }
        }
        let zero = OverlapTable::new(0.0, 10, 10);
        assert_eq!(zero.get(4, 4), 1.0);
        assert_eq!(zero.get(4, 5), 0.0);
    }

    #[test]
    fn large_displacement_stays_finite_and_normalized() {
        // alpha = 30: photon numbers around 900
        let alpha = 30.0f64;
        let table = OverlapTable::new(alpha, 2400, 40);
        for k in [0usize, 7, 40] {
            let s = table.column_sum(k);
            assert!((s - 1.0).abs() < 1e-10, "k {k}: {s}");
        }
    }

    #[test]
    fn thermal_weight_special_cases() {
        let policy = TruncationPolicy::default();
        assert_eq!(displaced_thermal_weight(0, 0.0, 0.0, &policy).unwrap(), 1.0);
        assert_eq!(displaced_thermal_weight(3, 0.0, 0.0, &policy).unwrap(), 0.0);
        // displaced vacuum is Poissonian
        let mut fact = 1.0;
        for m in 0..12 {
            if m > 0 {
                fact *= m as f64;
            }
            let want = (-0.49f64).exp() * 0.49f64.powi(m as i32) / fact;
            let got = displaced_thermal_weight(m, 0.0, 0.7, &policy).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-13);
        }
        // no displacement: bare geometric distribution
        for m in 0..10 {
            let want = 4.0f64.powi(m as i32) / 5.0f64.powi(m as i32 + 1);
            let got = displaced_thermal_weight(m, 4.0, 0.0, &policy).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn single_precision_kernel() {
        let p: f32 = displaced_number_overlap(1, 0, 0.7f32);
        assert!((p - 0.300_186_9).abs() < 1e-6);
    }
}

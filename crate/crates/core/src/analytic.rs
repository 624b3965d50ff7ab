//! Closed-form atomic inversion and time-averaged lineshapes.
//!
//! Both observables reduce to a weighted sum over the photon-number
//! distribution `P(m)` of the *displaced* initial field: the displacement
//! `D(alpha)` maps the driven model onto the standard one, and in the
//! standard model an excited atom with `m` photons oscillates with the Rabi
//! frequency `Omega_{m+1}`. [`PhotonDistribution`] holds that distribution;
//! every public function here is a thin driver around it.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{rabi_frequency, FieldSpec, ModelParams, ThermalWeights, TruncationPolicy};
use crate::num::Real;
use crate::specfun::OverlapTable;

/// How much of an infinite series was kept.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TruncationReport<T = f64> {
    /// Highest photon number included.
    pub m_max: usize,
    /// Upper bound on the neglected mass (each summand is bounded by 1).
    pub tail_bound: T,
}

/// Truncated photon-number distribution `P(0..=m_max)`.
#[derive(Debug, Clone)]
pub struct PhotonDistribution<T = f64> {
    weights: Vec<T>,
    captured: T,
}

impl<T: Real> PhotonDistribution<T> {
    /// Bare Bose-Einstein distribution, no displacement.
    pub fn thermal(n_bar: T, policy: &TruncationPolicy<T>) -> Result<Self> {
        policy.validate()?;
        let weights_iter = ThermalWeights::new(n_bar);
        let mut tracker = MassTracker::new(policy.epsilon, n_bar, weights_iter.ratio(), 0);
        let mut weights = Vec::new();
        for (m, w) in weights_iter.enumerate() {
            if m >= policy.max_terms {
                return Err(cap_exceeded(policy, tracker.captured));
            }
            weights.push(w);
            if tracker.push(m, w) {
                break;
            }
        }
        Ok(Self {
            weights,
            captured: tracker.captured,
        })
    }

    /// Distribution of `D(alpha) rho_field D(alpha)^dagger` on the number basis.
    pub fn displaced(field: FieldSpec<T>, alpha: T, policy: &TruncationPolicy<T>) -> Result<Self> {
        policy.validate()?;
        if !(alpha.is_finite() && alpha >= T::zero()) {
            return Err(Error::InvalidArgument(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        let half_eps = policy.epsilon / T::of(2.0);
        // source weights p_k, k = 0..=k_max, leaving at most eps/2 behind
        let source: Vec<(usize, T)> = match field {
            FieldSpec::Thermal { n_bar } => {
                if !(n_bar.is_finite() && n_bar >= T::zero()) {
                    return Err(Error::InvalidArgument(format!("n_bar must be finite and >= 0, got {n_bar}")));
                }
                let len = ThermalWeights::terms_for(n_bar, half_eps);
                if len > policy.max_terms {
                    return Err(cap_exceeded(policy, T::zero()));
                }
                ThermalWeights::new(n_bar).take(len).enumerate().collect()
            }
            FieldSpec::Fock { k } => {
                if k >= policy.max_terms {
                    return Err(cap_exceeded(policy, T::zero()));
                }
                vec![(k, T::one())]
            }
        };
        let k_max = source.last().map(|s| s.0).unwrap_or(0);
        let (mean, ratio_floor) = match field {
            FieldSpec::Thermal { n_bar } => (n_bar + alpha * alpha, n_bar / (T::one() + n_bar)),
            FieldSpec::Fock { k } => (T::of_usize(k) + alpha * alpha, T::zero()),
        };

        let a = alpha.to_f64().unwrap_or(0.0);
        let margin = (a * a + 10.0 * a + 10.0).ceil() + (4.0 * a * (k_max as f64).sqrt()).ceil();
        let mut m_max = (k_max + 10 + margin as usize).min(policy.max_terms - 1);
        loop {
            let table = OverlapTable::new(alpha, m_max, k_max);
            let mut weights = Vec::with_capacity(m_max + 1);
            let mut tracker = MassTracker::new(policy.epsilon, mean, ratio_floor, k_max);
            for m in 0..=m_max {
                let w: T = source.iter().map(|&(k, p)| p * table.get(m, k)).sum();
                weights.push(w);
                if tracker.push(m, w) {
                    return Ok(Self {
                        weights,
                        captured: tracker.captured,
                    });
                }
            }
            if m_max + 1 >= policy.max_terms {
                return Err(cap_exceeded(policy, tracker.captured));
            }
            m_max = (2 * m_max).min(policy.max_terms - 1);
        }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn captured(&self) -> T {
        self.captured
    }

    pub fn report(&self) -> TruncationReport<T> {
        TruncationReport {
            m_max: self.weights.len().saturating_sub(1),
            tail_bound: (T::one() - self.captured).max(T::zero()),
        }
    }

    /// `sum_m P(m) [delta^2/4 + g^2 (m+1) cos(2 Omega_{m+1} t)] / Omega_{m+1}^2`
    pub fn inversion(&self, delta: T, g: T, t: T) -> T {
        let quarter_d2 = T::of(0.25) * delta * delta;
        let two = T::of(2.0);
        let sum: T = self
            .weights
            .iter()
            .enumerate()
            .map(|(m, &w)| {
                let omega = rabi_frequency(delta, g, m + 1);
                if omega == T::zero() {
                    return w;
                }
                let coupling = g * g * T::of_usize(m + 1);
                w * (quarter_d2 + coupling * (two * omega * t).cos()) / (omega * omega)
            })
            .sum();
        sum.max(-T::one()).min(T::one())
    }

    /// `sum_m P(m) (delta / (2 Omega_{m+1}))^2`
    pub fn lineshape(&self, delta: T, g: T) -> T {
        let d2 = delta * delta;
        if d2 == T::zero() {
            return T::zero();
        }
        let four_g2 = T::of(4.0) * g * g;
        let sum: T = self
            .weights
            .iter()
            .enumerate()
            .map(|(m, &w)| w * d2 / (d2 + four_g2 * T::of_usize(m + 1)))
            .sum();
        // rounding only: every factor is < 1 and the weights sum to <= 1
        sum.min(T::one() - T::epsilon())
    }
}

/// Running mass of a distribution summed term by term.
///
/// The series stops once `1 - eps` is captured. Thousands of weights each
/// carry a few ulps of error, so near `eps ~ 1e-12` the sum can stall just
/// short of that target even though the true remainder is negligible. Past
/// the mean, a falling term with a geometric tail estimate far below `eps`
/// also stops the series, provided the deficit is within `eps` plus a
/// rounding allowance. The deficit is still reported as the tail bound.
struct MassTracker<T> {
    eps: T,
    mean: T,
    /// Lower bound on the asymptotic term ratio.
    ratio_floor: T,
    extra_terms: usize,
    captured: T,
    prev: T,
}

impl<T: Real> MassTracker<T> {
    fn new(eps: T, mean: T, ratio_floor: T, extra_terms: usize) -> Self {
        Self {
            eps,
            mean,
            ratio_floor,
            extra_terms,
            captured: T::zero(),
            prev: T::zero(),
        }
    }

    fn push(&mut self, m: usize, w: T) -> bool {
        self.captured = self.captured + w;
        let prev = std::mem::replace(&mut self.prev, w);
        let deficit = T::one() - self.captured;
        if deficit <= self.eps {
            return true;
        }
        if T::of_usize(m) <= self.mean || w >= prev || w.is_nan() {
            return false;
        }
        let rho = (w / prev).max(self.ratio_floor);
        let tail = w * rho / (T::one() - rho);
        let rounding = T::of(64.0) * T::epsilon() * T::of_usize(m + self.extra_terms + 1);
        tail < self.eps * T::of(1e-3) && deficit <= self.eps + rounding
    }
}

fn cap_exceeded<T: Real>(policy: &TruncationPolicy<T>, captured: T) -> Error {
    Error::TruncationCapExceeded {
        max_terms: policy.max_terms,
        captured: captured.to_f64().unwrap_or(f64::NAN),
        at_delta: None,
    }
}

fn require_coupling<T: Real>(g: T) -> Result<()> {
    if g.is_finite() && g > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveCoupling {
            g: g.to_f64().unwrap_or(f64::NAN),
            zeta: f64::NAN,
        })
    }
}

/// Sampled `<sigma_z>(t)`.
#[derive(Debug, Clone, Serialize)]
pub struct InversionSeries<T = f64> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub params: ModelParams<T>,
    pub field: FieldSpec<T>,
    pub truncation_report: TruncationReport<T>,
}

/// Sampled `W(delta)`.
#[derive(Debug, Clone, Serialize)]
pub struct LineshapeCurve<T = f64> {
    pub deltas: Vec<T>,
    pub values: Vec<T>,
    pub g: T,
    pub alpha: T,
    pub field: FieldSpec<T>,
    pub truncation_report: TruncationReport<T>,
}

/// Driven-model inversion for a thermal field at a single time.
pub fn inversion_thermal<T: Real>(params: &ModelParams<T>, n_bar: T, t: T, policy: &TruncationPolicy<T>) -> Result<T> {
    let dist = PhotonDistribution::displaced(FieldSpec::Thermal { n_bar }, params.alpha(), policy)?;
    Ok(dist.inversion(params.delta(), params.g(), t))
}

/// Standard-model inversion (no drive, bare Bose-Einstein weights).
///
/// Accepts `g = 0`; a fully decoupled atom at `delta = 0` stays excited.
pub fn inversion_undriven<T: Real>(params: &ModelParams<T>, n_bar: T, t: T, policy: &TruncationPolicy<T>) -> Result<T> {
    let dist = PhotonDistribution::thermal(n_bar, policy)?;
    Ok(dist.inversion(params.delta(), params.g(), t))
}

/// `<sigma_z>` on a caller-supplied time grid, sharing one distribution.
pub fn inversion_series<T: Real>(
    params: &ModelParams<T>,
    field: FieldSpec<T>,
    times: &[T],
    policy: &TruncationPolicy<T>,
) -> Result<InversionSeries<T>> {
    let dist = PhotonDistribution::displaced(field, params.alpha(), policy)?;
    let (delta, g) = (params.delta(), params.g());
    let values = times.par_iter().map(|&t| dist.inversion(delta, g, t)).collect();
    Ok(InversionSeries {
        times: times.to_vec(),
        values,
        params: *params,
        field,
        truncation_report: dist.report(),
    })
}

/// Same as [`inversion_series`] for a thermal field but through the
/// undriven closed form; `params.alpha()` is ignored.
pub fn inversion_series_undriven<T: Real>(
    params: &ModelParams<T>,
    n_bar: T,
    times: &[T],
    policy: &TruncationPolicy<T>,
) -> Result<InversionSeries<T>> {
    let dist = PhotonDistribution::thermal(n_bar, policy)?;
    let (delta, g) = (params.delta(), params.g());
    let values = times.par_iter().map(|&t| dist.inversion(delta, g, t)).collect();
    Ok(InversionSeries {
        times: times.to_vec(),
        values,
        params: params.undriven(),
        field: FieldSpec::Thermal { n_bar },
        truncation_report: dist.report(),
    })
}

pub fn lineshape_thermal<T: Real>(g: T, alpha: T, n_bar: T, delta: T, policy: &TruncationPolicy<T>) -> Result<T> {
    require_coupling(g)?;
    let dist = PhotonDistribution::displaced(FieldSpec::Thermal { n_bar }, alpha, policy)
        .map_err(|e| e.at_delta(delta.to_f64().unwrap_or(f64::NAN)))?;
    Ok(dist.lineshape(delta, g))
}

pub fn lineshape_undriven<T: Real>(g: T, n_bar: T, delta: T, policy: &TruncationPolicy<T>) -> Result<T> {
    require_coupling(g)?;
    let dist = PhotonDistribution::thermal(n_bar, policy).map_err(|e| e.at_delta(delta.to_f64().unwrap_or(f64::NAN)))?;
    Ok(dist.lineshape(delta, g))
}

pub fn lineshape_fock<T: Real>(g: T, alpha: T, k: usize, delta: T, policy: &TruncationPolicy<T>) -> Result<T> {
    require_coupling(g)?;
    let dist = PhotonDistribution::displaced(FieldSpec::Fock { k }, alpha, policy)
        .map_err(|e| e.at_delta(delta.to_f64().unwrap_or(f64::NAN)))?;
    Ok(dist.lineshape(delta, g))
}

/// Check that a grid is non-empty, finite and non-decreasing.
pub fn check_grid<T: Real>(grid: &[T], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} grid is empty")));
    }
    if let Some(bad) = grid.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} grid has non-finite value {bad}")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(format!("{what} grid is not sorted")));
    }
    Ok(())
}

/// Evaluate `W` on a detuning grid. The photon distribution does not
/// depend on the detuning, so it is built once.
pub fn sweep_lineshape<T: Real>(
    field: FieldSpec<T>,
    g: T,
    alpha: T,
    delta_grid: &[T],
    policy: &TruncationPolicy<T>,
) -> Result<LineshapeCurve<T>> {
    check_grid(delta_grid, "delta")?;
    require_coupling(g)?;
    let dist = PhotonDistribution::displaced(field, alpha, policy)
        .map_err(|e| e.at_delta(delta_grid[0].to_f64().unwrap_or(f64::NAN)))?;
    let values = delta_grid.par_iter().map(|&d| dist.lineshape(d, g)).collect();
    Ok(LineshapeCurve {
        deltas: delta_grid.to_vec(),
        values,
        g,
        alpha,
        field,
        truncation_report: dist.report(),
    })
}

/// Standard-model lineshape sweep for a thermal field.
pub fn sweep_lineshape_undriven<T: Real>(
    g: T,
    n_bar: T,
    delta_grid: &[T],
    policy: &TruncationPolicy<T>,
) -> Result<LineshapeCurve<T>> {
    check_grid(delta_grid, "delta")?;
    require_coupling(g)?;
    let dist = PhotonDistribution::thermal(n_bar, policy)?;
    let values = delta_grid.par_iter().map(|&d| dist.lineshape(d, g)).collect();
    Ok(LineshapeCurve {
        deltas: delta_grid.to_vec(),
        values,
        g,
        alpha: T::zero(),
        field: FieldSpec::Thermal { n_bar },
        truncation_report: dist.report(),
    })
}

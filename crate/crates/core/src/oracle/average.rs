use serde::Serialize;

use super::propagate::{inversion_numeric, NumericOptions, Propagation};
use crate::analytic::InversionSeries;
use crate::error::{Error, Result};
use crate::model::{FieldSpec, ModelParams};

pub const MIN_AVERAGE_SAMPLES: usize = 1000;

/// Trapezoidal mean of `<sigma_z>` over `[0, window]`.
pub fn time_average_numeric(series: &InversionSeries, window: f64) -> Result<f64> {
    let count = series.times.iter().take_while(|&&t| t <= window).count();
    let covers = series.times.first() == Some(&0.0) && count > 0 && series.times[count - 1] >= window * (1.0 - 1e-12);
    if count < MIN_AVERAGE_SAMPLES || !covers || window <= 0.0 {
        return Err(Error::InsufficientSamples {
            required: MIN_AVERAGE_SAMPLES,
            got: if covers { count } else { 0 },
            window,
        });
    }
    let t = &series.times[..count];
    let y = &series.values[..count];
    let area: f64 = t
        .windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum();
    Ok(area / (t[count - 1] - t[0]))
}

/// Settings for [`lineshape_numeric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageOptions {
    /// Averaging window in units of `1/g`.
    pub window_g: f64,
    pub samples: usize,
    pub numeric: NumericOptions,
}

impl Default for AverageOptions {
    fn default() -> Self {
        Self {
            window_g: 2000.0,
            samples: 200_000,
            numeric: NumericOptions {
                propagation: Propagation::Transformed,
                ..NumericOptions::default()
            },
        }
    }
}

/// A concrete parameter set realizing `(g, alpha, delta)`.
///
/// The lineshape depends on nothing else; the cavity sits at
/// `0.4 + |delta|` and the cavity drive at `xi = 0.2`, so both transition
/// frequencies stay positive for either sign of `delta`.
pub fn lineshape_scenario(g: f64, alpha: f64, delta: f64) -> Result<ModelParams> {
    let omega_c = 0.4 + delta.abs();
    let xi = if alpha > 0.0 { 0.2 } else { 0.0 };
    ModelParams::new(omega_c, omega_c + delta, g, alpha * g, xi)
}

/// Numeric time average of `<sigma_z>` over `[0, window_g / g]`, the
/// reference for the closed-form lineshape.
pub fn lineshape_numeric(field: FieldSpec, g: f64, alpha: f64, delta: f64, opts: &AverageOptions) -> Result<f64> {
    let params = lineshape_scenario(g, alpha, delta)?;
    let window = opts.window_g / g;
    let n = opts.samples.max(2);
    let times: Vec<f64> = (0..n).map(|i| window * i as f64 / (n - 1) as f64).collect();
    let series = inversion_numeric(&params, field, &times, &opts.numeric)?;
    time_average_numeric(&series, window)
}

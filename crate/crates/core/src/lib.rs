//! Driven Jaynes-Cummings model: a two-level atom in a cavity, both
//! classically driven at the frequency fixed by `omega_0 = omega_c - g xi / zeta`.
//!
//! [`analytic`] evaluates the closed-form atomic inversion and time-averaged
//! lineshapes for thermal and Fock initial fields, generic over the scalar
//! type. [`oracle`] is an independent truncated Fock-space integrator used to
//! check them, and [`cli`] writes the results as CSV or JSON tables.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod model;
pub mod num;
pub mod oracle;
pub mod specfun;

pub use analytic::{
    inversion_series, inversion_series_undriven, inversion_thermal, inversion_undriven, lineshape_fock,
    lineshape_thermal, lineshape_undriven, sweep_lineshape, sweep_lineshape_undriven, InversionSeries, LineshapeCurve,
    PhotonDistribution, TruncationReport,
};
pub use error::{Error, Result};
pub use model::{DerivedParams, FieldSpec, ModelParams, ParamInput, TruncationPolicy};
pub use num::Real;
pub use specfun::{displaced_number_overlap, displaced_thermal_weight, laguerre_assoc, OverlapTable};

pub type ModelParamsF64 = ModelParams<f64>;
pub type ModelParamsF32 = ModelParams<f32>;
pub type FieldSpecF64 = FieldSpec<f64>;
pub type FieldSpecF32 = FieldSpec<f32>;
pub type TruncationPolicyF64 = TruncationPolicy<f64>;
pub type TruncationPolicyF32 = TruncationPolicy<f32>;
pub type InversionSeriesF64 = InversionSeries<f64>;
pub type InversionSeriesF32 = InversionSeries<f32>;
pub type LineshapeCurveF64 = LineshapeCurve<f64>;
pub type LineshapeCurveF32 = LineshapeCurve<f32>;

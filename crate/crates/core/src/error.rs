use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coupling g must be positive when the classical drive is on (g = {g}, zeta = {zeta})")]
    NonPositiveCoupling { g: f64, zeta: f64 },

    #[error("parameter `{name}` must be {requirement} (got {value})")]
    NegativeRate {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("explicit omega_0 = {given} contradicts omega_c - g*xi/zeta = {derived}")]
    ConstrictionViolated { given: f64, derived: f64 },

    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series did not converge within {max_terms} terms (captured mass {captured:.3e}){}", at_delta.map(|d| format!(" at delta = {d}")).unwrap_or_default())]
    TruncationCapExceeded {
        max_terms: usize,
        captured: f64,
        at_delta: Option<f64>,
    },

    #[error("Fock cutoff {cutoff} is too small (need at least {required})")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("norm drifted by {drift:.3e} at t = {time}")]
    NormDrift { drift: f64, time: f64 },

    #[error("top-of-basis occupation {occupation:.3e} exceeds {threshold:.1e} at t = {time} (cutoff {cutoff})")]
    LeakageExceeded {
        occupation: f64,
        threshold: f64,
        time: f64,
        cutoff: usize,
    },

    #[error("time average needs at least {required} samples on [0, {window}], got {got}")]
    InsufficientSamples {
        required: usize,
        got: usize,
        window: f64,
    },
}

impl Error {
    /// Attach the detuning at which a truncation failure happened.
    pub fn at_delta(self, delta: f64) -> Self {
        match self {
            Error::TruncationCapExceeded {
                max_terms,
                captured,
                ..
            } => Error::TruncationCapExceeded {
                max_terms,
                captured,
                at_delta: Some(delta),
            },
            other => other,
        }
    }
}

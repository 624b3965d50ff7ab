//! Physical parameters of the driven Jaynes-Cummings model, their derived
//! detunings and the initial field specification.
//!
//! Units are chosen with `hbar = 1`; frequencies are angular.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Relative tolerance for an explicitly supplied drive frequency.
const OMEGA_0_REL_TOL: f64 = 1e-9;

/// Unvalidated parameter set as it arrives from a caller or the command line.
///
/// `omega_0` is optional: it is always derived from
/// `omega_c - g * xi / zeta`, and an explicit value is only checked against it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamInput<T = f64> {
    pub omega_c: T,
    pub omega_eg: T,
    pub g: T,
    pub zeta: T,
    pub xi: T,
    pub omega_0: Option<T>,
}

impl<T: Real> ParamInput<T> {
    pub fn new(omega_c: T, omega_eg: T, g: T, zeta: T, xi: T) -> Self {
        Self {
            omega_c,
            omega_eg,
            g,
            zeta,
            xi,
            omega_0: None,
        }
    }

    pub fn with_omega_0(mut self, omega_0: T) -> Self {
        self.omega_0 = Some(omega_0);
        self
    }

    pub fn validate(self) -> Result<ModelParams<T>> {
        validate_params(self)
    }
}

/// Validated model parameters. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T = f64> {
    omega_c: T,
    omega_eg: T,
    g: T,
    zeta: T,
    xi: T,
    omega_0: T,
}

impl<T: Real> ModelParams<T> {
    /// Validate a full parameter set; shorthand for [`validate_params`].
    pub fn new(omega_c: T, omega_eg: T, g: T, zeta: T, xi: T) -> Result<Self> {
        validate_params(ParamInput::new(omega_c, omega_eg, g, zeta, xi))
    }

    pub fn omega_c(&self) -> T {
        self.omega_c
    }
    pub fn omega_eg(&self) -> T {
        self.omega_eg
    }
    pub fn g(&self) -> T {
        self.g
    }
    pub fn zeta(&self) -> T {
        self.zeta
    }
    /// Raw cavity drive coupling as supplied.
    pub fn xi(&self) -> T {
        self.xi
    }
    pub fn omega_0(&self) -> T {
        self.omega_0
    }

    /// Whether the classical field acts on the system at all.
    pub fn is_driven(&self) -> bool {
        self.zeta > T::zero()
    }

    /// Cavity drive coupling that actually enters the Hamiltonian.
    ///
    /// With `zeta = 0` every drive term is absent, including the cavity one.
    pub fn effective_xi(&self) -> T {
        if self.is_driven() {
            self.xi
        } else {
            T::zero()
        }
    }

    /// Atom-cavity detuning `omega_eg - omega_c`.
    pub fn delta(&self) -> T {
        self.omega_eg - self.omega_c
    }

    /// Displacement amplitude `zeta / g` (zero when undriven).
    pub fn alpha(&self) -> T {
        if self.is_driven() {
            self.zeta / self.g
        } else {
            T::zero()
        }
    }

    pub fn derived(&self) -> DerivedParams<T> {
        derive(self)
    }

    /// The same model with the classical drive switched off.
    pub fn undriven(&self) -> Self {
        Self {
            zeta: T::zero(),
            xi: T::zero(),
            omega_0: self.omega_c,
            ..*self
        }
    }
}

/// Detunings and displacement amplitude following from a [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams<T = f64> {
    /// `omega_c - omega_0 = g xi / zeta`
    pub delta_c: T,
    /// `omega_eg - omega_0`
    pub delta_eg: T,
    /// `omega_eg - omega_c`
    pub delta: T,
    pub alpha: T,
}

fn require<T: Real>(ok: bool, name: &'static str, requirement: &'static str, v: T) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::NegativeRate {
            name,
            requirement,
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Check a raw parameter set and fix `omega_0` from the constriction
/// `omega_0 = omega_c - g xi / zeta`.
pub fn validate_params<T: Real>(raw: ParamInput<T>) -> Result<ModelParams<T>> {
    let zero = T::zero();
    let ParamInput {
        omega_c,
        omega_eg,
        g,
        zeta,
        xi,
        omega_0,
    } = raw;
    require(omega_c.is_finite() && omega_c > zero, "omega_c", "finite and > 0", omega_c)?;
    require(omega_eg.is_finite() && omega_eg > zero, "omega_eg", "finite and > 0", omega_eg)?;
    require(g.is_finite() && g >= zero, "g", "finite and >= 0", g)?;
    require(zeta.is_finite() && zeta >= zero, "zeta", "finite and >= 0", zeta)?;
    require(xi.is_finite() && xi >= zero, "xi", "finite and >= 0", xi)?;
    if zeta > zero && g <= zero {
        return Err(Error::NonPositiveCoupling {
            g: g.to_f64().unwrap_or(f64::NAN),
            zeta: zeta.to_f64().unwrap_or(f64::NAN),
        });
    }

    let derived_omega_0 = if zeta > zero {
        omega_c - g * xi / zeta
    } else {
        omega_c
    };
    if let Some(given) = omega_0 {
        let scale = derived_omega_0.abs().max(T::one());
        if !given.is_finite() || (given - derived_omega_0).abs() > T::of(OMEGA_0_REL_TOL) * scale {
            return Err(Error::ConstrictionViolated {
                given: given.to_f64().unwrap_or(f64::NAN),
                derived: derived_omega_0.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(ModelParams {
        omega_c,
        omega_eg,
        g,
        zeta,
        xi,
        omega_0: derived_omega_0,
    })
}

pub fn derive<T: Real>(params: &ModelParams<T>) -> DerivedParams<T> {
    let delta_c = if params.is_driven() {
        params.g * params.xi / params.zeta
    } else {
        T::zero()
    };
    DerivedParams {
        delta_c,
        delta_eg: params.omega_eg - params.omega_0,
        delta: params.delta(),
        alpha: params.alpha(),
    }
}

/// `Omega_n = sqrt(delta^2 / 4 + g^2 n)`.
#[inline]
pub fn rabi_frequency<T: Real>(delta: T, g: T, n: usize) -> T {
    let quarter = T::of(0.25);
    (quarter * delta * delta + g * g * T::of_usize(n)).sqrt()
}

/// Initial state of the cavity field. The atom always starts excited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSpec<T = f64> {
    Thermal { n_bar: T },
    Fock { k: usize },
}

impl<T: Real> FieldSpec<T> {
    pub fn thermal(n_bar: T) -> Result<Self> {
        if !(n_bar.is_finite() && n_bar >= T::zero()) {
            return Err(Error::NegativeRate {
                name: "n_bar",
                requirement: "finite and >= 0",
                value: n_bar.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(FieldSpec::Thermal { n_bar })
    }

    pub fn fock(k: usize) -> Self {
        FieldSpec::Fock { k }
    }

    /// Short label used in file suffixes and reports.
    pub fn label(&self) -> String {
        match self {
            FieldSpec::Thermal { n_bar } => format!("nbar{n_bar}"),
            FieldSpec::Fock { k } => format!("fock{k}"),
        }
    }
}

/// Iterator over the Bose-Einstein weights `n^k / (1 + n)^(k+1)`.
#[derive(Debug, Clone)]
pub struct ThermalWeights<T> {
    ratio: T,
    next: T,
}

impl<T: Real> ThermalWeights<T> {
    pub fn new(n_bar: T) -> Self {
        let one = T::one();
        Self {
            ratio: n_bar / (one + n_bar),
            next: one / (one + n_bar),
        }
    }

    /// `n / (1 + n)`, the geometric ratio.
    pub fn ratio(&self) -> T {
        self.ratio
    }

    /// Number of leading weights needed so that the remaining mass
    /// `ratio^len` drops below `epsilon`.
    pub fn terms_for(n_bar: T, epsilon: T) -> usize {
        let ratio = n_bar / (T::one() + n_bar);
        if ratio <= T::zero() {
            return 1;
        }
        let len = (epsilon.ln() / ratio.ln()).ceil();
        len.to_usize().unwrap_or(usize::MAX).max(1)
    }
}

impl<T: Real> Iterator for ThermalWeights<T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        let w = self.next;
        self.next = self.next * self.ratio;
        Some(w)
    }
}

/// Series truncation rule shared by every infinite sum in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy<T = f64> {
    pub epsilon: T,
    pub max_terms: usize,
}

impl<T: Real> Default for TruncationPolicy<T> {
    fn default() -> Self {
        Self {
            epsilon: T::of(1e-12).max(T::min_tolerance()),
            max_terms: 4096,
        }
    }
}

impl<T: Real> TruncationPolicy<T> {
    pub fn new(epsilon: T, max_terms: usize) -> Result<Self> {
        let p = Self { epsilon, max_terms };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(Error::InvalidPolicy(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.epsilon < T::min_tolerance() {
            return Err(Error::InvalidPolicy(format!(
                "epsilon {} is below what this precision can resolve ({})",
                self.epsilon,
                T::min_tolerance()
            )));
        }
        if self.max_terms < 16 {
            return Err(Error::InvalidPolicy(format!(
                "max_terms must be at least 16, got {}",
                self.max_terms
            )));
        }
        Ok(())
    }
}

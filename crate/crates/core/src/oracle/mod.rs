//! Independent numerical reference: dense truncated Fock-space evolution.
//!
//! Two propagation paths are provided and are meant to be checked against
//! each other:
//!
//! * [`evolve_lab`] integrates the time-dependent lab-frame Hamiltonian
//!   directly with a fixed-step RK4 scheme;
//! * [`evolve_transformed`] rotates to the drive frame, displaces by
//!   `alpha = zeta / g`, propagates exactly with the eigendecomposition of
//!   the resulting time-independent Jaynes-Cummings Hamiltonian and undoes
//!   both transformations.
//!
//! Basis ordering is `|0,g>, .., |N-1,g>, |0,e>, .., |N-1,e>`.
//! Everything here is double precision.

mod average;
mod operators;
mod propagate;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub use average::{lineshape_numeric, lineshape_scenario, time_average_numeric, AverageOptions};
pub use operators::{build_h_jc, build_h_lab, displacement_matrix, Eigh, LabHamiltonian};
pub use propagate::{
    auto_cutoff, evolve_lab, evolve_transformed, inversion_numeric, inversion_numeric_with_diagnostics, LabOptions,
    MixtureSpectrum, NumericDiagnostics, NumericOptions, Propagation, TransformedPropagator,
};

pub type C64 = Complex<f64>;

/// Default top-of-basis occupation above which a cutoff is rejected.
pub const LEAKAGE_THRESHOLD: f64 = 1e-8;

/// Truncated atom (x) field state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumStateVector {
    cutoff: usize,
    amplitudes: DVector<C64>,
    time: f64,
}

impl QuantumStateVector {
    pub fn from_amplitudes(cutoff: usize, amplitudes: DVector<C64>, time: f64) -> Result<Self> {
        check_cutoff(cutoff)?;
        if amplitudes.len() != 2 * cutoff {
            return Err(Error::InvalidArgument(format!(
                "state of length {} does not match cutoff {cutoff}",
                amplitudes.len()
            )));
        }
        Ok(Self {
            cutoff,
            amplitudes,
            time,
        })
    }

    /// `|k, e>` at `t = 0`.
    pub fn excited_fock(k: usize, cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        if k >= cutoff {
            return Err(Error::CutoffTooSmall {
                cutoff,
                required: k + 1,
            });
        }
        let mut amplitudes = DVector::zeros(2 * cutoff);
        amplitudes[cutoff + k] = C64::new(1.0, 0.0);
        Ok(Self {
            cutoff,
            amplitudes,
            time: 0.0,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<sigma_z>` = excited minus ground population.
    pub fn sigma_z(&self) -> f64 {
        let n = self.cutoff;
        let ground: f64 = self.amplitudes.rows(0, n).iter().map(|a| a.norm_sqr()).sum();
        let excited: f64 = self.amplitudes.rows(n, n).iter().map(|a| a.norm_sqr()).sum();
        excited - ground
    }

    /// Population of the highest retained Fock level, both atomic states.
    pub fn top_occupation(&self) -> f64 {
        let n = self.cutoff;
        self.amplitudes[n - 1].norm_sqr() + self.amplitudes[2 * n - 1].norm_sqr()
    }

    /// `|<self|other>|`, insensitive to a global phase.
    pub fn overlap_modulus(&self, other: &Self) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }
}

/// Dense complex operator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: DMatrix<C64>,
    pub hermitian: bool,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |H - H^dagger|` elementwise.
    pub fn hermiticity_residual(&self) -> f64 {
        let diff = &self.matrix - self.matrix.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |U^dagger U - I|` elementwise.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        let prod = self.matrix.adjoint() * &self.matrix;
        let diff = prod - DMatrix::<C64>::identity(n, n);
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermitian eigendecomposition; fails if the matrix is not flagged
    /// Hermitian.
    pub fn eigh(&self) -> Result<Eigh> {
        if !self.hermitian {
            return Err(Error::InvalidArgument("eigendecomposition of a non-Hermitian operator".into()));
        }
        Ok(Eigh::new(&self.matrix))
    }
}

pub(crate) fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        Err(Error::CutoffTooSmall { cutoff, required: 2 })
    } else {
        Ok(())
    }
}

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::operators::{build_h_jc, displacement_matrix, Eigh, LabHamiltonian};
use super::{check_cutoff, QuantumStateVector, C64, LEAKAGE_THRESHOLD};
use crate::analytic::{InversionSeries, TruncationReport};
use crate::error::{Error, Result};
use crate::model::{FieldSpec, ModelParams, ThermalWeights};

/// Fixed-step RK4 settings for [`evolve_lab`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabOptions {
    /// Upper bound on `h * spectral_bound`.
    pub step_safety: f64,
    pub norm_tol: f64,
    pub leakage_tol: f64,
}

impl Default for LabOptions {
    fn default() -> Self {
        Self {
            step_safety: 0.05,
            norm_tol: 1e-7,
            leakage_tol: LEAKAGE_THRESHOLD,
        }
    }
}

fn check_times(t_grid: &[f64], start: f64) -> Result<()> {
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be finite and ascending".into()));
    }
    match t_grid.first() {
        Some(&t0) if t0 < start => Err(Error::InvalidArgument(format!(
            "time grid starts at {t0}, before the initial state time {start}"
        ))),
        _ => Ok(()),
    }
}

fn check_leakage(state: &QuantumStateVector, tol: f64) -> Result<()> {
    let occupation = state.top_occupation();
    if occupation > tol {
        return Err(Error::LeakageExceeded {
            occupation,
            threshold: tol,
            time: state.time(),
            cutoff: state.cutoff(),
        });
    }
    Ok(())
}

/// Integrate `i d|psi>/dt = H_lab(t) |psi>` with classical RK4 and return the
/// state at every grid time. The norm is not renormalized; its drift is a
/// diagnostic.
pub fn evolve_lab(
    params: &ModelParams,
    initial: &QuantumStateVector,
    t_grid: &[f64],
    opts: &LabOptions,
) -> Result<Vec<QuantumStateVector>> {
    check_times(t_grid, initial.time())?;
    let n = initial.cutoff();
    let ham = LabHamiltonian::new(params, n)?;
    let h_max = opts.step_safety / ham.spectral_bound();
    let dim = 2 * n;
    let norm0 = initial.norm();

    let mut y: Vec<C64> = initial.amplitudes().iter().copied().collect();
    let mut k1 = vec![C64::default(); dim];
    let mut k2 = vec![C64::default(); dim];
    let mut k3 = vec![C64::default(); dim];
    let mut k4 = vec![C64::default(); dim];
    let mut tmp = vec![C64::default(); dim];
    let mut t = initial.time();

    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for s in 0..steps {
                let ts = t + s as f64 * h;
                ham.apply_rhs(ts, &y, &mut k1);
                for i in 0..dim {
                    tmp[i] = y[i] + k1[i] * (0.5 * h);
                }
                ham.apply_rhs(ts + 0.5 * h, &tmp, &mut k2);
                for i in 0..dim {
                    tmp[i] = y[i] + k2[i] * (0.5 * h);
                }
                ham.apply_rhs(ts + 0.5 * h, &tmp, &mut k3);
                for i in 0..dim {
                    tmp[i] = y[i] + k3[i] * h;
                }
                ham.apply_rhs(ts + h, &tmp, &mut k4);
                for i in 0..dim {
                    y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
                }
            }
            t = target;
        }
        let state = QuantumStateVector::from_amplitudes(n, DVector::from_column_slice(&y), target)?;
        let drift = (state.norm() - norm0).abs();
        if drift > opts.norm_tol {
            return Err(Error::NormDrift { drift, time: target });
        }
        check_leakage(&state, opts.leakage_tol)?;
        out.push(state);
    }
    Ok(out)
}

/// Exact propagator `e^{i xi alpha t} T^dagger D^dagger U_JC(t) D`, with
/// `U_JC` from the eigendecomposition of [`build_h_jc`].
#[derive(Debug, Clone)]
pub struct TransformedPropagator {
    cutoff: usize,
    omega_0: f64,
    /// Constant energy shift removed by the displacement, `-xi alpha`.
    shift: f64,
    eig: Eigh,
    displacement: DMatrix<C64>,
    leakage_tol: f64,
}

impl TransformedPropagator {
    pub fn new(params: &ModelParams, cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        let eig = build_h_jc(params, cutoff)?.eigh()?;
        let displacement = displacement_matrix(params.alpha(), cutoff)?.matrix;
        Ok(Self {
            cutoff,
            omega_0: params.omega_0(),
            shift: -params.effective_xi() * params.alpha(),
            eig,
            displacement,
            leakage_tol: LEAKAGE_THRESHOLD,
        })
    }

    pub fn with_leakage_tol(mut self, tol: f64) -> Self {
        self.leakage_tol = tol;
        self
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn eigen(&self) -> &Eigh {
        &self.eig
    }

    /// `D(alpha) |psi>`, checked for leakage.
    fn displace(&self, initial: &QuantumStateVector) -> Result<DVector<C64>> {
        if initial.cutoff() != self.cutoff {
            return Err(Error::InvalidArgument(format!(
                "state cutoff {} differs from propagator cutoff {}",
                initial.cutoff(),
                self.cutoff
            )));
        }
        let phi = &self.displacement * initial.amplitudes();
        check_leakage(
            &QuantumStateVector::from_amplitudes(self.cutoff, phi.clone(), initial.time())?,
            self.leakage_tol,
        )?;
        Ok(phi)
    }

    pub fn evolve(&self, initial: &QuantumStateVector, t_grid: &[f64]) -> Result<Vec<QuantumStateVector>> {
        check_times(t_grid, initial.time())?;
        let n = self.cutoff;
        let t0 = initial.time();
        let coeffs = self.eig.vectors.adjoint() * self.displace(initial)?;
        let d_adj = self.displacement.adjoint();
        t_grid
            .iter()
            .map(|&t| {
                let tau = t - t0;
                let rotated = DVector::from_iterator(
                    coeffs.len(),
                    coeffs
                        .iter()
                        .zip(self.eig.values.iter())
                        .map(|(c, e)| c * C64::from_polar(1.0, -(e + self.shift) * tau)),
                );
                let mut psi = &d_adj * (&self.eig.vectors * rotated);
                // T^dagger = exp[-i w0 tau (n + sz/2)]
                for j in 0..n {
                    let nj = j as f64;
                    psi[j] *= C64::from_polar(1.0, -self.omega_0 * tau * (nj - 0.5));
                    psi[n + j] *= C64::from_polar(1.0, -self.omega_0 * tau * (nj + 0.5));
                }
                let state = QuantumStateVector::from_amplitudes(n, psi, t)?;
                check_leakage(&state, self.leakage_tol)?;
                Ok(state)
            })
            .collect()
    }
}

/// Evolve through the displaced drive frame; see [`TransformedPropagator`].
pub fn evolve_transformed(
    params: &ModelParams,
    initial: &QuantumStateVector,
    t_grid: &[f64],
) -> Result<Vec<QuantumStateVector>> {
    TransformedPropagator::new(params, initial.cutoff())?.evolve(initial, t_grid)
}

/// `<sigma_z>(t)` of an incoherent mixture of `|k, e>` trajectories,
/// written in the eigenbasis of the transformed Hamiltonian as
/// `sum_ij M_ij e^{i (E_i - E_j) t}`.
///
/// Only entries above `1e-18` are kept; `sigma_z` does not couple different
/// excitation manifolds, so the surviving set is roughly linear in the
/// dimension.
#[derive(Debug, Clone)]
pub struct MixtureSpectrum {
    constant: f64,
    terms: Vec<(f64, C64)>,
    max_leakage: f64,
    max_norm_drift: f64,
}

impl MixtureSpectrum {
    pub fn new(prop: &TransformedPropagator, mixture: &[(usize, f64)]) -> Result<Self> {
        let n = prop.cutoff;
        let dim = 2 * n;
        let v = &prop.eig.vectors;
        let v_adj = v.adjoint();

        // rho_ij = sum_k p_k c_ki conj(c_kj), c_k = V^dagger D |k,e>
        let mut rho = DMatrix::<C64>::zeros(dim, dim);
        let mut max_leakage = 0.0f64;
        let mut max_norm_drift = 0.0f64;
        for &(k, p) in mixture {
            let initial = QuantumStateVector::excited_fock(k, n)?;
            let phi = prop.displace(&initial)?;
            max_leakage = max_leakage.max(phi[n - 1].norm_sqr() + phi[dim - 1].norm_sqr());
            max_norm_drift = max_norm_drift.max((phi.norm() - 1.0).abs());
            let c = &v_adj * phi;
            rho += (&c * c.adjoint()) * C64::new(p, 0.0);
        }

        // Z = V^dagger sz V
        let mut sz_v = v.clone();
        for j in 0..n {
            sz_v.row_mut(j).neg_mut();
        }
        let z = &v_adj * sz_v;

        let e = &prop.eig.values;
        let mut constant = 0.0;
        let mut terms = Vec::new();
        for i in 0..dim {
            constant += (z[(i, i)] * rho[(i, i)]).re;
            for j in i + 1..dim {
                let m = z[(i, j)] * rho[(j, i)];
                if m.norm() > 1e-18 {
                    terms.push((e[i] - e[j], m));
                }
            }
        }
        Ok(Self {
            constant,
            terms,
            max_leakage,
            max_norm_drift,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, t: f64) -> f64 {
        let osc: f64 = self
            .terms
            .iter()
            .map(|&(w, m)| (m * C64::from_polar(1.0, w * t)).re)
            .sum();
        self.constant + 2.0 * osc
    }
}

/// Which propagation path [`inversion_numeric`] uses for each trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagation {
    Lab,
    Transformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericOptions {
    /// Fock cutoff; `None` picks one per trajectory and grows it on leakage.
    pub cutoff: Option<usize>,
    pub propagation: Propagation,
    /// Thermal mixture tail mass that may be dropped.
    pub epsilon: f64,
    pub lab: LabOptions,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            cutoff: None,
            propagation: Propagation::Lab,
            epsilon: 1e-12,
            lab: LabOptions::default(),
        }
    }
}

/// Starting cutoff for a trajectory from `|k_max, e>`.
///
/// The lab-frame state is displaced twice (`D` then `D^dagger`), so that
/// path budgets for twice the amplitude.
pub fn auto_cutoff(alpha: f64, k_max: usize, propagation: Propagation) -> usize {
    let a = match propagation {
        Propagation::Lab => 2.0 * alpha,
        Propagation::Transformed => alpha,
    };
    let margin = (a * a + 10.0 * a + 10.0).ceil() + (4.0 * a * (k_max as f64).sqrt()).ceil();
    k_max + 10 + margin as usize
}

const CUTOFF_RETRIES: usize = 4;

/// Retry `run` with growing cutoffs while it reports leakage, unless the
/// cutoff was fixed by the caller.
fn with_cutoff<R>(fixed: Option<usize>, start: usize, mut run: impl FnMut(usize) -> Result<R>) -> Result<(usize, R)> {
    if let Some(n) = fixed {
        return run(n).map(|r| (n, r));
    }
    let mut n = start;
    let mut attempt = 0;
    loop {
        match run(n) {
            Err(Error::LeakageExceeded { .. }) if attempt < CUTOFF_RETRIES => {
                attempt += 1;
                n += n / 2;
            }
            other => return other.map(|r| (n, r)),
        }
    }
}

fn mixture_for(field: FieldSpec, epsilon: f64) -> Vec<(usize, f64)> {
    match field {
        FieldSpec::Thermal { n_bar } => {
            let len = ThermalWeights::terms_for(n_bar, epsilon);
            ThermalWeights::new(n_bar).take(len).enumerate().collect()
        }
        FieldSpec::Fock { k } => vec![(k, 1.0)],
    }
}

/// Health of a numeric run, worst case over trajectories and samples.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NumericDiagnostics {
    /// Largest cutoff used by any trajectory.
    pub cutoff: usize,
    pub max_leakage: f64,
    pub max_norm_drift: f64,
    /// Thermal mixture mass that was not propagated.
    pub dropped_mass: f64,
}

/// `<sigma_z>(t) = sum_k p_k <psi_k(t)| sz |psi_k(t)>`, `psi_k(0) = |k, e>`.
pub fn inversion_numeric(
    params: &ModelParams,
    field: FieldSpec,
    t_grid: &[f64],
    opts: &NumericOptions,
) -> Result<InversionSeries> {
    inversion_numeric_with_diagnostics(params, field, t_grid, opts).map(|r| r.0)
}

/// [`inversion_numeric`] plus leakage and norm diagnostics.
pub fn inversion_numeric_with_diagnostics(
    params: &ModelParams,
    field: FieldSpec,
    t_grid: &[f64],
    opts: &NumericOptions,
) -> Result<(InversionSeries, NumericDiagnostics)> {
    check_times(t_grid, 0.0)?;
    let mut mixture = mixture_for(field, opts.epsilon);
    let mut dropped = 1.0 - mixture.iter().map(|m| m.1).sum::<f64>();
    if let Some(n) = opts.cutoff {
        check_cutoff(n)?;
        let outside: f64 = mixture.iter().filter(|m| m.0 >= n).map(|m| m.1).sum();
        if outside > opts.epsilon {
            return Err(Error::LeakageExceeded {
                occupation: outside,
                threshold: opts.epsilon,
                time: 0.0,
                cutoff: n,
            });
        }
        mixture.retain(|m| m.0 < n);
        dropped += outside;
    }
    let alpha = params.alpha();

    let mut diag = NumericDiagnostics {
        dropped_mass: dropped.max(0.0),
        ..NumericDiagnostics::default()
    };
    let values = match opts.propagation {
        Propagation::Lab => {
            let runs: Vec<Result<(usize, Trajectory)>> = mixture
                .par_iter()
                .map(|&(k, _)| {
                    with_cutoff(opts.cutoff, auto_cutoff(alpha, k, Propagation::Lab), |n| {
                        let initial = QuantumStateVector::excited_fock(k, n)?;
                        let states = evolve_lab(params, &initial, t_grid, &opts.lab)?;
                        Ok(Trajectory::from_states(&states))
                    })
                })
                .collect();
            let mut values = vec![0.0; t_grid.len()];
            for (run, &(_, p)) in runs.into_iter().zip(&mixture) {
                let (n, traj) = run?;
                diag.cutoff = diag.cutoff.max(n);
                diag.max_leakage = diag.max_leakage.max(traj.max_leakage);
                diag.max_norm_drift = diag.max_norm_drift.max(traj.max_norm_drift);
                for (v, s) in values.iter_mut().zip(traj.sigma_z) {
                    *v += p * s;
                }
            }
            values
        }
        Propagation::Transformed => {
            let k_max = mixture.last().map(|m| m.0).unwrap_or(0);
            let (n, spectrum) = with_cutoff(opts.cutoff, auto_cutoff(alpha, k_max, Propagation::Transformed), |n| {
                let prop = TransformedPropagator::new(params, n)?;
                MixtureSpectrum::new(&prop, &mixture)
            })?;
            diag.cutoff = n;
            diag.max_leakage = spectrum.max_leakage;
            diag.max_norm_drift = spectrum.max_norm_drift;
            t_grid.par_iter().map(|&t| spectrum.value(t)).collect()
        }
    };

    let series = InversionSeries {
        times: t_grid.to_vec(),
        values,
        params: *params,
        field,
        truncation_report: TruncationReport {
            m_max: diag.cutoff.saturating_sub(1),
            tail_bound: diag.dropped_mass,
        },
    };
    Ok((series, diag))
}

struct Trajectory {
    sigma_z: Vec<f64>,
    max_leakage: f64,
    max_norm_drift: f64,
}

impl Trajectory {
    fn from_states(states: &[QuantumStateVector]) -> Self {
        Self {
            sigma_z: states.iter().map(|s| s.sigma_z()).collect(),
            max_leakage: states.iter().map(|s| s.top_occupation()).fold(0.0, f64::max),
            max_norm_drift: states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max),
        }
    }
}

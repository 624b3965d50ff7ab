use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{check_cutoff, OperatorMatrix, C64};
use crate::error::Result;
use crate::model::ModelParams;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Lab-frame Hamiltonian at time `t`:
///
/// ```text
/// w_eg/2 sz + w_c n + g (s+ a + s- a+)
///   + zeta (s- e^{i w0 t} + s+ e^{-i w0 t}) + xi (a e^{i w0 t} + a+ e^{-i w0 t})
/// ```
pub fn build_h_lab(params: &ModelParams, t: f64, cutoff: usize) -> Result<OperatorMatrix> {
    check_cutoff(cutoff)?;
    let n = cutoff;
    let mut h = DMatrix::<C64>::zeros(2 * n, 2 * n);
    let (g, zeta, xi) = (params.g(), params.zeta(), params.effective_xi());
    let phase = C64::from_polar(1.0, params.omega_0() * t); // e^{i w0 t}
    for j in 0..n {
        let (gj, ej) = (j, n + j);
        let nj = j as f64;
        h[(gj, gj)] = re(-0.5 * params.omega_eg() + params.omega_c() * nj);
        h[(ej, ej)] = re(0.5 * params.omega_eg() + params.omega_c() * nj);
        // zeta s+ e^{-i w0 t}: |j,g> -> |j,e>
        h[(ej, gj)] = zeta * phase.conj();
        h[(gj, ej)] = zeta * phase;
        if j + 1 < n {
            let s = ((j + 1) as f64).sqrt();
            // g s+ a: |j+1,g> -> |j,e>
            h[(ej, gj + 1)] = re(g * s);
            h[(gj + 1, ej)] = re(g * s);
            // xi a+ e^{-i w0 t}: |j> -> |j+1> in both atomic states
            for off in [0, n] {
                h[(off + j + 1, off + j)] = xi * s * phase.conj();
                h[(off + j, off + j + 1)] = xi * s * phase;
            }
        }
    }
    Ok(OperatorMatrix {
        matrix: h,
        hermitian: true,
    })
}

/// Drive-frame, displaced Hamiltonian
/// `delta_c n + delta_eg/2 sz + g (s+ a + s- a+)`.
pub fn build_h_jc(params: &ModelParams, cutoff: usize) -> Result<OperatorMatrix> {
    check_cutoff(cutoff)?;
    let n = cutoff;
    let d = params.derived();
    let g = params.g();
    let mut h = DMatrix::<C64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        let nj = j as f64;
        h[(j, j)] = re(d.delta_c * nj - 0.5 * d.delta_eg);
        h[(n + j, n + j)] = re(d.delta_c * nj + 0.5 * d.delta_eg);
        if j + 1 < n {
            let s = g * ((j + 1) as f64).sqrt();
            h[(n + j, j + 1)] = re(s);
            h[(j + 1, n + j)] = re(s);
        }
    }
    Ok(OperatorMatrix {
        matrix: h,
        hermitian: true,
    })
}

/// `D(alpha) = exp[alpha (a+ - a)]` on the full atom (x) field space,
/// computed from the eigendecomposition of the Hermitian generator
/// `i alpha (a+ - a)`.
pub fn displacement_matrix(alpha: f64, cutoff: usize) -> Result<OperatorMatrix> {
    check_cutoff(cutoff)?;
    let n = cutoff;
    let field = if alpha == 0.0 {
        DMatrix::<C64>::identity(n, n)
    } else {
        let mut gen = DMatrix::<C64>::zeros(n, n);
        for j in 0..n - 1 {
            let s = alpha * ((j + 1) as f64).sqrt();
            // i alpha (a+ - a)
            gen[(j + 1, j)] = I * s;
            gen[(j, j + 1)] = -I * s;
        }
        Eigh::new(&gen).exp_i(-1.0)
    };
    let mut full = DMatrix::<C64>::zeros(2 * n, 2 * n);
    full.view_mut((0, 0), (n, n)).copy_from(&field);
    full.view_mut((n, n), (n, n)).copy_from(&field);
    Ok(OperatorMatrix {
        matrix: full,
        hermitian: false,
    })
}

/// Eigendecomposition `H = V diag(E) V^dagger` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigh {
    pub fn new(h: &DMatrix<C64>) -> Self {
        if h.iter().all(|z| z.im == 0.0) {
            let real = h.map(|z| z.re);
            let eig = SymmetricEigen::new(real);
            Self {
                values: eig.eigenvalues,
                vectors: eig.eigenvectors.map(re),
            }
        } else {
            let eig = SymmetricEigen::new(h.clone());
            Self {
                values: eig.eigenvalues,
                vectors: eig.eigenvectors,
            }
        }
    }

    /// `exp(i s H) = V diag(e^{i s E}) V^dagger`.
    pub fn exp_i(&self, s: f64) -> DMatrix<C64> {
        let phases = self.values.map(|e| C64::from_polar(1.0, s * e));
        let mut scaled = self.vectors.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *p;
        }
        scaled * self.vectors.adjoint()
    }
}

/// Matrix-free application of the lab-frame Hamiltonian, used by the RK4
/// integrator. Equivalent to multiplying by [`build_h_lab`].
#[derive(Debug, Clone)]
pub struct LabHamiltonian {
    cutoff: usize,
    omega_c: f64,
    omega_eg: f64,
    omega_0: f64,
    g: f64,
    zeta: f64,
    xi: f64,
    sqrt: Vec<f64>,
}

impl LabHamiltonian {
    pub fn new(params: &ModelParams, cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        Ok(Self {
            cutoff,
            omega_c: params.omega_c(),
            omega_eg: params.omega_eg(),
            omega_0: params.omega_0(),
            g: params.g(),
            zeta: params.zeta(),
            xi: params.effective_xi(),
            sqrt: (0..=cutoff).map(|j| (j as f64).sqrt()).collect(),
        })
    }

    /// Bound on the spectral radius used to pick the RK4 step.
    pub fn spectral_bound(&self) -> f64 {
        let n = self.cutoff as f64;
        0.5 * self.omega_eg + self.omega_c * n + 2.0 * self.g * n.sqrt() + 2.0 * self.zeta + 2.0 * self.xi * n.sqrt()
    }

    /// `out = -i H(t) psi`.
    pub fn apply_rhs(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let n = self.cutoff;
        let (ground, excited) = psi.split_at(n);
        let phase = C64::from_polar(1.0, self.omega_0 * t);
        let zp = self.zeta * phase;
        let zm = self.zeta * phase.conj();
        let xp = self.xi * phase;
        let xm = self.xi * phase.conj();
        let half = 0.5 * self.omega_eg;
        for j in 0..n {
            let nj = j as f64;
            let mut hg = ground[j] * (self.omega_c * nj - half) + zp * excited[j];
            let mut he = excited[j] * (self.omega_c * nj + half) + zm * ground[j];
            if j + 1 < n {
                let s = self.sqrt[j + 1];
                he += ground[j + 1] * (self.g * s);
                hg += xp * s * ground[j + 1];
                he += xp * s * excited[j + 1];
            }
            if j > 0 {
                let s = self.sqrt[j];
                hg += excited[j - 1] * (self.g * s);
                hg += xm * s * ground[j - 1];
                he += xm * s * excited[j - 1];
            }
            out[j] = C64::new(hg.im, -hg.re);
            out[n + j] = C64::new(he.im, -he.re);
        }
    }
}

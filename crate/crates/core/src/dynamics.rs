//! Unitary time evolution ψ(t) = exp(−iHt)ψ₀ (ħ = 1, t in ħ/eV).
//!
//! Each step is propagated in a Lanczos subspace. The step is split whenever
//! the a-posteriori Krylov error estimate exceeds the tolerance, and the run
//! fails if the accumulated norm drift still exceeds [`NORM_TOLERANCE`].

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::fock::{Basis, FockState};
use crate::hamiltonian::HamiltonianMatrix;
use crate::linalg::{cdot, cnorm};
use crate::{Error, Result};

pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub krylov_dim: usize,
    /// Per-substep Krylov error target, relative to the state norm.
    pub tolerance: f64,
    /// Give up after this many substeps per output step.
    pub max_substeps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            krylov_dim: 30,
            tolerance: 1e-14,
            max_substeps: 1 << 16,
        }
    }
}

/// Evolves `psi0` for total time `t` in `steps` equal steps, returning ψ(t).
pub fn evolve(h: &HamiltonianMatrix, psi0: &[Complex64], t: f64, steps: usize) -> Result<Vec<Complex64>> {
    evolve_with(h, psi0, t, steps, &EvolveOptions::default(), |_, _, _| {})
}

/// Like [`evolve`], calling `observe(step, time, state)` at t = 0 and after every step.
pub fn evolve_with(
    h: &HamiltonianMatrix,
    psi0: &[Complex64],
    t: f64,
    steps: usize,
    opts: &EvolveOptions,
    mut observe: impl FnMut(usize, f64, &[Complex64]),
) -> Result<Vec<Complex64>> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian {
            asymmetry: h.matrix().asymmetry(),
        });
    }
    if psi0.len() != h.dim() {
        return Err(Error::Shape {
            expected: h.dim(),
            found: psi0.len(),
        });
    }
    let n0 = cnorm(psi0);
    if (n0 - 1.0).abs() > 1e-12 {
        return Err(Error::domain("initial state must be normalized"));
    }
    if steps == 0 || !t.is_finite() {
        return Err(Error::domain("need a finite time and at least one step"));
    }

    let dt = t / steps as f64;
    let mut psi = psi0.to_vec();
    let mut work = KrylovWork::new(h.dim(), opts.krylov_dim);
    observe(0, 0.0, &psi);
    for step in 1..=steps {
        let mut remaining = dt;
        let mut sub = dt;
        let mut substeps = 0;
        while remaining.abs() > 0.0 {
            let tau = if sub.abs() > remaining.abs() { remaining } else { sub };
            match work.step(h, &psi, tau, opts.tolerance) {
                Some(next) => {
                    psi = next;
                    remaining -= tau;
                    if remaining.abs() <= 1e-15 * dt.abs() {
                        remaining = 0.0;
                    }
                }
                None => sub = tau * 0.5,
            }
            substeps += 1;
            if substeps > opts.max_substeps {
                return Err(Error::NoConvergence {
                    iterations: substeps,
                    residual: f64::NAN,
                });
            }
        }
        observe(step, dt * step as f64, &psi);
    }
    let drift = (cnorm(&psi) - 1.0).abs();
    if drift > NORM_TOLERANCE {
        return Err(Error::NormDrift { drift });
    }
    Ok(psi)
}

struct KrylovWork {
    krylov_dim: usize,
    w: Vec<Complex64>,
}

impl KrylovWork {
    fn new(dim: usize, krylov_dim: usize) -> Self {
        KrylovWork {
            krylov_dim: krylov_dim.max(2),
            w: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// One Krylov step of length `tau`; `None` when the error estimate is too large.
    fn step(&mut self, h: &HamiltonianMatrix, psi: &[Complex64], tau: f64, tol: f64) -> Option<Vec<Complex64>> {
        let m = h.matrix();
        let dim = psi.len();
        let scale = m.norm_inf().max(f64::MIN_POSITIVE);
        let nrm = cnorm(psi);
        if nrm == 0.0 {
            return Some(psi.to_vec());
        }
        let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|x| x / nrm).collect()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut tail = 0.0;
        let kmax = self.krylov_dim.min(dim);
        for k in 0..kmax {
            m.mul_vec_complex(&basis[k], &mut self.w);
            let a = cdot(&basis[k], &self.w).re;
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let p = cdot(q, &self.w);
                    self.w.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
                }
            }
            let b = cnorm(&self.w);
            if b <= 1e-14 * scale || k + 1 == kmax {
                tail = if b <= 1e-14 * scale { 0.0 } else { b };
                break;
            }
            beta.push(b);
            basis.push(self.w.iter().map(|x| x / b).collect());
        }

        let kdim = alpha.len();
        let mut t = DMatrix::zeros(kdim, kdim);
        for i in 0..kdim {
            t[(i, i)] = alpha[i];
            if i + 1 < kdim {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        // c = exp(−i T tau) e1
        let mut c = vec![Complex64::new(0.0, 0.0); kdim];
        for j in 0..kdim {
            let phase = Complex64::new(0.0, -eig.eigenvalues[j] * tau).exp();
            let w0 = eig.eigenvectors[(0, j)];
            for (i, ci) in c.iter_mut().enumerate() {
                *ci += eig.eigenvectors[(i, j)] * w0 * phase;
            }
        }
        if tail * c[kdim - 1].norm() > tol {
            return None;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (ci, q) in c.iter().zip(&basis) {
            let s = ci * nrm;
            out.iter_mut().zip(q).for_each(|(o, qi)| *o += s * qi);
        }
        Some(out)
    }
}

/// ⟨ψ|H|ψ⟩.
pub fn expectation(h: &HamiltonianMatrix, psi: &[Complex64]) -> f64 {
    let mut hpsi = vec![Complex64::new(0.0, 0.0); psi.len()];
    h.matrix().mul_vec_complex(psi, &mut hpsi);
    cdot(psi, &hpsi).re
}

/// |⟨target|ψ⟩|².
pub fn transition_probability(psi: &[Complex64], basis: &Basis, target: &FockState) -> Result<f64> {
    let idx = basis.index_of(target).ok_or(Error::NotInBasis)?;
    Ok(psi[idx].norm_sqr().min(1.0))
}

/// Basis vector for `state`.
pub fn basis_state(basis: &Basis, state: &FockState) -> Result<Vec<Complex64>> {
    let idx = basis.index_of(state).ok_or(Error::NotInBasis)?;
    let mut v = vec![Complex64::new(0.0, 0.0); basis.len()];
    v[idx] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// Probability that the excitation sits on each site.
pub fn site_populations(psi: &[Complex64], basis: &Basis) -> Vec<f64> {
    let mut p = vec![0.0; basis.sites()];
    for (amp, s) in psi.iter().zip(basis.states()) {
        p[s.excited_site()] += amp.norm_sqr();
    }
    p
}

/// Mean number of ground and excited vibration quanta.
pub fn mean_quanta(psi: &[Complex64], basis: &Basis) -> (f64, f64) {
    psi.iter().zip(basis.states()).fold((0.0, 0.0), |(g, e), (amp, s)| {
        let w = amp.norm_sqr();
        (
            g + w * s.ground().iter().sum::<u32>() as f64,
            e + w * s.excited().iter().sum::<u32>() as f64,
        )
    })
}

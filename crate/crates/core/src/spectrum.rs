//! Lowest eigenpairs of a hermitian (real symmetric) Hamiltonian.
//!
//! Small matrices go through a dense symmetric eigensolver. Larger ones use
//! Lanczos with full reorthogonalization, locking each converged eigenvector
//! and restarting so degenerate levels are resolved one copy at a time.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::hamiltonian::HamiltonianMatrix;
use crate::linalg::{dot, norm, SparseMatrix};
use crate::{Error, Result};

/// Relative residual every reported eigenpair must meet: ‖Hv − λv‖ ≤ tol·‖H‖.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Dimensions up to this size use the dense solver.
    pub dense_limit: usize,
    /// Maximum Krylov dimension per Lanczos cycle.
    pub krylov_dim: usize,
    /// Maximum restarts per eigenpair.
    pub max_restarts: usize,
    pub keep_vectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_limit: 400,
            krylov_dim: 120,
            max_restarts: 40,
            keep_vectors: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Ascending eigenvalues, eV.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// ‖Hv − λv‖ for each pair.
    pub residuals: Vec<f64>,
}

/// The `count` lowest eigenvalues of `h`.
pub fn diagonalize(h: &HamiltonianMatrix, count: usize) -> Result<SpectrumResult> {
    diagonalize_with(h, count, &SolverOptions::default())
}

pub fn diagonalize_with(h: &HamiltonianMatrix, count: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian {
            asymmetry: h.matrix().asymmetry(),
        });
    }
    let dim = h.dim();
    let count = count.min(dim);
    if count == 0 {
        return Ok(SpectrumResult {
            eigenvalues: Vec::new(),
            eigenvectors: opts.keep_vectors.then(Vec::new),
            residuals: Vec::new(),
        });
    }
    let m = h.matrix();
    let (values, vectors) = if dim <= opts.dense_limit {
        dense_lowest(m, count)
    } else {
        lanczos_lowest(m, count, opts)?
    };

    let scale = m.norm_inf().max(f64::MIN_POSITIVE);
    let mut residuals = Vec::with_capacity(count);
    let mut hv = vec![0.0; dim];
    for (lambda, v) in values.iter().zip(&vectors) {
        m.mul_vec(v, &mut hv);
        let r = hv
            .iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if r > RESIDUAL_TOLERANCE * scale {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: r,
            });
        }
        residuals.push(r);
    }
    Ok(SpectrumResult {
        eigenvalues: values,
        eigenvectors: opts.keep_vectors.then_some(vectors),
        residuals,
    })
}

/// Every eigenvalue of a small dense symmetric matrix, ascending.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn dense_lowest(m: &SparseMatrix, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m.to_dense());
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(count);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

/// Deterministic start vector with no special symmetry.
fn start_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..dim)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in against {
            let p = dot(u, v);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
        }
    }
}

fn lanczos_lowest(m: &SparseMatrix, count: usize, opts: &SolverOptions) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = m.dim();
    let scale = m.norm_inf().max(f64::MIN_POSITIVE);
    let target = 0.5 * RESIDUAL_TOLERANCE * scale;
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut values = Vec::new();
    let mut w = vec![0.0; dim];

    for pair in 0..count {
        let mut start = start_vector(dim, pair as u64 + 1);
        let mut best_residual = f64::INFINITY;
        let mut total_iters = 0;
        let mut found = None;
        for _ in 0..=opts.max_restarts {
            orthogonalize(&mut start, &locked);
            let n0 = norm(&start);
            if n0 == 0.0 {
                start = start_vector(dim, 1000 + pair as u64);
                continue;
            }
            start.iter_mut().for_each(|x| *x /= n0);

            let mut basis: Vec<Vec<f64>> = vec![start.clone()];
            let mut alpha: Vec<f64> = Vec::new();
            let mut beta: Vec<f64> = Vec::new();
            let kmax = opts.krylov_dim.min(dim - locked.len()).max(1);
            let mut ritz = Vec::new();
            for k in 0..kmax {
                total_iters += 1;
                m.mul_vec(&basis[k], &mut w);
                let a = dot(&basis[k], &w);
                alpha.push(a);
                orthogonalize(&mut w, &locked);
                orthogonalize(&mut w, &basis);
                let b = norm(&w);
                let y = lowest_tridiagonal(&alpha, &beta);
                let estimate = b * y[k].abs();
                ritz = y;
                if estimate <= target || b <= 1e-14 * scale || k + 1 == kmax {
                    break;
                }
                beta.push(b);
                basis.push(w.iter().map(|x| x / b).collect());
            }
            let mut v = vec![0.0; dim];
            for (coef, q) in ritz.iter().zip(&basis) {
                v.iter_mut().zip(q).for_each(|(x, qi)| *x += coef * qi);
            }
            orthogonalize(&mut v, &locked);
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            m.mul_vec(&v, &mut w);
            let lambda = dot(&v, &w);
            let r = w.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
            best_residual = best_residual.min(r);
            if r <= target {
                found = Some((lambda, v));
                break;
            }
            start = v;
        }
        match found {
            Some((lambda, v)) => {
                values.push(lambda);
                locked.push(v);
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations: total_iters,
                    residual: best_residual,
                })
            }
        }
    }

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok((
        order.iter().map(|&i| values[i]).collect(),
        order.iter().map(|&i| locked[i].clone()).collect(),
    ))
}

/// Eigenvector of the lowest eigenvalue of the symmetric tridiagonal matrix (alpha, beta).
fn lowest_tridiagonal(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let idx = (0..k)
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap_or(0);
    eig.eigenvectors.column(idx).iter().copied().collect()
}

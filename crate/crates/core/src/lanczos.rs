//! Restarted Lanczos for the lowest eigenpair of a real symmetric operator,
//! plus a dense fallback for small matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::{RealOperator, SparseHamiltonian};

pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov vectors kept per restart cycle.
    pub krylov: usize,
    /// Target residual `|H v - E v|`.
    pub tolerance: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { krylov: 80, tolerance: 1e-9, max_restarts: 200, seed: 7 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenvalue and normalized eigenvector.
pub fn lowest_eigenpair<O: RealOperator>(op: &O, opts: &LanczosOptions) -> Result<(f64, Vec<f64>)> {
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::invalid("dim", "empty operator"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut start);

    let m = opts.krylov.max(2).min(dim);
    let mut w = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    for cycle in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(start.clone());
        for j in 0..m {
            op.apply_real(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            if j + 1 == m {
                break;
            }
            let b = normalize(&mut w);
            if b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w.clone());
        }
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
        let idx = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty tridiagonal");
        let mut x = vec![0.0; dim];
        for (i, v) in basis.iter().enumerate() {
            let c = eig.eigenvectors[(i, idx)];
            x.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
        }
        normalize(&mut x);
        op.apply_real(&x, &mut w);
        let energy = dot(&x, &w);
        residual = w
            .iter()
            .zip(&x)
            .map(|(hv, v)| (hv - energy * v).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual < opts.tolerance {
            return Ok((energy, x));
        }
        start = x;
        if cycle == opts.max_restarts {
            break;
        }
    }
    Err(Error::NotConverged { iterations: opts.max_restarts * m, residual })
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnormalize(v: &mut [Complex64]) -> f64 {
    let n = cdot(v, v).re.sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenpair of a complex Hermitian operator given as a closure,
/// optionally warm-started.
pub fn lowest_eigenpair_complex<F>(
    dim: usize,
    apply: F,
    start: Option<&[Complex64]>,
    opts: &LanczosOptions,
) -> Result<(f64, Vec<Complex64>)>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    if dim == 0 {
        return Err(Error::invalid("dim", "empty operator"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v0: Vec<Complex64> = match start {
        Some(s) if s.len() == dim => s.to_vec(),
        _ => (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect(),
    };
    if cnormalize(&mut v0) == 0.0 {
        v0[0] = Complex64::new(1.0, 0.0);
    }
    let m = opts.krylov.max(2).min(dim);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut residual = f64::INFINITY;
    for _ in 0..=opts.max_restarts {
        let mut basis = vec![v0.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            apply(&basis[j], &mut w);
            alpha.push(cdot(&basis[j], &w).re);
            for _ in 0..2 {
                for v in &basis {
                    let c = cdot(v, &w);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            if j + 1 == m {
                break;
            }
            let b = cnormalize(&mut w);
            if b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w.clone());
        }
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
        let idx = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty tridiagonal");
        let mut x = vec![Complex64::new(0.0, 0.0); dim];
        for (i, v) in basis.iter().enumerate() {
            let c = eig.eigenvectors[(i, idx)];
            x.iter_mut().zip(v).for_each(|(a, b)| *a += b * c);
        }
        cnormalize(&mut x);
        apply(&x, &mut w);
        let energy = cdot(&x, &w).re;
        residual = w
            .iter()
            .zip(&x)
            .map(|(hv, v)| (hv - v * energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual < opts.tolerance {
            return Ok((energy, x));
        }
        v0 = x;
    }
    Err(Error::NotConverged { iterations: opts.max_restarts * m, residual })
}

/// Full spectrum of a small sparse matrix, ascending, with eigenvectors as
/// columns.
pub fn dense_eigen(h: &SparseHamiltonian) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if h.dim() > DENSE_LIMIT {
        return Err(Error::invalid(
            "dim",
            format!("dense fallback limited to {DENSE_LIMIT}, got {}", h.dim()),
        ));
    }
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.dim(), h.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);

    impl RealOperator for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply_real(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
        }
    }

    #[test]
    fn finds_lowest_of_diagonal() {
        let d: Vec<f64> = (0..500).map(|i| ((i * 37) % 500) as f64 * 0.01 + 1.0).collect();
        let (e, v) = lowest_eigenpair(&Diag(d.clone()), &LanczosOptions::default()).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
        let pos = d.iter().position(|&x| x == 1.0).unwrap();
        assert!((v[pos].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn complex_hermitian_two_level() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let apply = |x: &[Complex64], y: &mut [Complex64]| {
            let i = Complex64::new(0.0, 1.0);
            y[0] = x[0] + i * x[1];
            y[1] = -i * x[0] + x[1];
        };
        let (e, v) = lowest_eigenpair_complex(2, apply, None, &LanczosOptions::default()).unwrap();
        assert!(e.abs() < 1e-12);
        assert!((v[0].norm() - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn tiny_operator() {
        let (e, _) = lowest_eigenpair(&Diag(vec![3.0]), &LanczosOptions::default()).unwrap();
        assert_eq!(e, 3.0);
    }
}

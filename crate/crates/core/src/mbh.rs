//! States, observables and ground states on the multiband Fock space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::hamiltonian::SparseHamiltonian;
use crate::lanczos::{lowest_eigenpair, LanczosOptions};

/// Complex amplitudes over a [`FockBasis`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbhState {
    pub amplitudes: Vec<Complex64>,
}

impl MbhState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        MbhState { amplitudes }
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        MbhState { amplitudes }
    }

    pub fn from_real(v: &[f64]) -> Self {
        MbhState { amplitudes: v.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
    }

    pub fn inner(&self, other: &MbhState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Mismatch(format!("state dims {} vs {}", self.dim(), other.dim())));
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `|<a|b>|`.
pub fn fidelity(a: &MbhState, b: &MbhState) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}

/// Lowest eigenpair of `h` by restarted Lanczos.
pub fn ground_state(h: &SparseHamiltonian) -> Result<(f64, MbhState)> {
    ground_state_with(h, &LanczosOptions::default())
}

pub fn ground_state_with(h: &SparseHamiltonian, opts: &LanczosOptions) -> Result<(f64, MbhState)> {
    let (e, v) = lowest_eigenpair(h, opts)?;
    Ok((e, MbhState::from_real(&v)))
}

/// `<sum_a n_{k,a}>` for each site `k`.
pub fn site_populations(basis: &FockBasis, amplitudes: &[Complex64]) -> Vec<f64> {
    let mut pops = vec![0.0; basis.sites()];
    let bands = basis.bands();
    for (occ, a) in basis.iter().zip(amplitudes) {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (k, pop) in pops.iter_mut().enumerate() {
            let n: usize = occ[k * bands..(k + 1) * bands].iter().map(|&x| x as usize).sum();
            *pop += p * n as f64;
        }
    }
    pops
}

/// `<sum_k n_{k,a}>` for each band `a`.
pub fn band_populations(basis: &FockBasis, amplitudes: &[Complex64]) -> Vec<f64> {
    let mut pops = vec![0.0; basis.bands()];
    let bands = basis.bands();
    for (occ, a) in basis.iter().zip(amplitudes) {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (m, &n) in occ.iter().enumerate() {
            pops[m % bands] += p * n as f64;
        }
    }
    pops
}

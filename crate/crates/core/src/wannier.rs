//! Real, parity-definite Wannier functions on the `L`-site ring.
//!
//! Site-0 functions are stored as plane-wave sums
//! `w(x) = sum_m a_m exp(i K_m x)` with `K_m = pi (q_j + 2n)`; the function
//! at site `i` is `w(x - i)`, so translation covariance is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{BlochSpectrum, LatticeSpec};
use crate::quadrature::{periodic_grid, simpson_periodic};

/// Smallest lattice depth for which the parity phase convention is applied.
pub const MIN_DEPTH: f64 = 0.1;

const PHASE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WannierBasis {
    pub spec: LatticeSpec,
    /// Wave numbers `K_m` in units of `1/a`.
    pub wavenumbers: Vec<f64>,
    /// `coefficients[band][m]` of the site-0 function.
    pub coefficients: Vec<Vec<Complex64>>,
}

impl WannierBasis {
    pub fn bands(&self) -> usize {
        self.coefficients.len()
    }

    pub fn sites(&self) -> usize {
        self.spec.sites
    }

    fn check_band(&self, band: usize) -> Result<()> {
        if band >= self.bands() {
            return Err(Error::invalid(
                "band",
                format!("band index {band} but only {} bands built", self.bands()),
            ));
        }
        Ok(())
    }

    /// Complex values of the plane-wave sum for band `band` at site `site`.
    pub fn complex_values(&self, band: usize, site: usize, xs: &[f64]) -> Result<Vec<Complex64>> {
        self.check_band(band)?;
        let length = self.spec.length();
        let coeffs = &self.coefficients[band];
        Ok(xs
            .iter()
            .map(|&x| {
                let u = (x - site as f64).rem_euclid(length);
                self.wavenumbers
                    .iter()
                    .zip(coeffs)
                    .map(|(&k, &a)| a * Complex64::from_polar(1.0, k * u))
                    .sum()
            })
            .collect())
    }

    /// Pointwise values `w_site^band(x)`. Positions outside the ring are
    /// wrapped. Fails if the imaginary part exceeds `1e-10`.
    pub fn values(&self, band: usize, site: usize, xs: &[f64]) -> Result<Vec<f64>> {
        let vals = self.complex_values(band, site, xs)?;
        let imag = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if imag > 1e-10 {
            return Err(Error::NotReal { band, imag });
        }
        Ok(vals.into_iter().map(|v| v.re).collect())
    }

    /// Second derivative of the real Wannier function at `xs`.
    pub fn second_derivative(&self, band: usize, site: usize, xs: &[f64]) -> Result<Vec<f64>> {
        self.check_band(band)?;
        let length = self.spec.length();
        let coeffs = &self.coefficients[band];
        Ok(xs
            .iter()
            .map(|&x| {
                let u = (x - site as f64).rem_euclid(length);
                self.wavenumbers
                    .iter()
                    .zip(coeffs)
                    .map(|(&k, &a)| (a * Complex64::from_polar(-k * k, k * u)).re)
                    .sum()
            })
            .collect())
    }

    /// Exact overlap `<w_i^a | w_j^b>` from the plane-wave coefficients.
    pub fn overlap(&self, band_a: usize, site_a: usize, band_b: usize, site_b: usize) -> f64 {
        let shift = site_a as f64 - site_b as f64;
        let sum: Complex64 = self
            .wavenumbers
            .iter()
            .zip(&self.coefficients[band_a])
            .zip(&self.coefficients[band_b])
            .map(|((&k, a), b)| a.conj() * b * Complex64::from_polar(1.0, k * shift))
            .sum();
        sum.re * self.spec.length()
    }

    /// Exact one-particle matrix element `<w_i^a | h | w_j^b>` within the
    /// truncated plane-wave space.
    pub fn hamiltonian_element(
        &self,
        band_a: usize,
        site_a: usize,
        band_b: usize,
        site_b: usize,
    ) -> f64 {
        let s = self.spec.depth;
        let shift_a = site_a as f64;
        let shift_b = site_b as f64;
        // plane-wave vectors of both functions, keyed by position in `wavenumbers`
        let a: Vec<Complex64> = self
            .wavenumbers
            .iter()
            .zip(&self.coefficients[band_a])
            .map(|(&k, &c)| c * Complex64::from_polar(1.0, -k * shift_a))
            .collect();
        let b: Vec<Complex64> = self
            .wavenumbers
            .iter()
            .zip(&self.coefficients[band_b])
            .map(|(&k, &c)| c * Complex64::from_polar(1.0, -k * shift_b))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (m, &k) in self.wavenumbers.iter().enumerate() {
            let kin = (k / PI).powi(2) + 0.5 * s;
            total += a[m].conj() * b[m] * kin;
        }
        // -s/4 couples K and K + 2 pi, neighbours inside each quasimomentum block
        let block = self.spec.plane_waves();
        for start in (0..self.wavenumbers.len()).step_by(block) {
            for m in start..start + block - 1 {
                total += (a[m].conj() * b[m + 1] + a[m + 1].conj() * b[m]) * (-0.25 * s);
            }
        }
        total.re * self.spec.length()
    }
}

/// Builds Wannier functions from a Bloch spectrum.
///
/// Phases: for odd band numbers (1, 3, ...) `phi_q(0)` is real positive; for
/// even band numbers `d phi_q / dx (0)` is real positive. Band numbers here
/// are 1-based; the stored band index is 0-based.
pub fn build_wannier(spectrum: &BlochSpectrum) -> Result<WannierBasis> {
    let spec = spectrum.spec;
    if spec.depth < MIN_DEPTH {
        return Err(Error::invalid(
            "depth",
            format!("Wannier construction needs depth >= {MIN_DEPTH}, got {}", spec.depth),
        ));
    }
    let cutoff = spec.cutoff as i64;
    let l = spec.sites as f64;

    let mut wavenumbers = Vec::with_capacity(spec.sites * spec.plane_waves());
    for j in 0..spec.sites {
        let q = spec.quasimomentum(j);
        for n in -cutoff..=cutoff {
            wavenumbers.push(PI * (q + 2.0 * n as f64));
        }
    }

    let mut coefficients = Vec::with_capacity(spectrum.bands());
    for band in 0..spectrum.bands() {
        let even_parity = band % 2 == 0;
        let mut coeffs = Vec::with_capacity(wavenumbers.len());
        for j in 0..spec.sites {
            let q = spec.quasimomentum(j);
            let v = &spectrum.vectors[band][j];
            let gauge: f64 = if even_parity {
                v.iter().sum()
            } else {
                v.iter()
                    .enumerate()
                    .map(|(i, c)| c * (q + 2.0 * (i as i64 - cutoff) as f64))
                    .sum()
            };
            if gauge.abs() < PHASE_TOL {
                return Err(Error::DegenerateBand { band, q: j });
            }
            let phase = if even_parity {
                Complex64::new(gauge.signum(), 0.0)
            } else {
                Complex64::new(0.0, -gauge.signum())
            };
            coeffs.extend(v.iter().map(|&c| phase * (c / l)));
        }
        coefficients.push(coeffs);
    }

    let basis = WannierBasis { spec, wavenumbers, coefficients };
    // realness: coefficient of -K must be the conjugate of that of K
    for band in 0..basis.bands() {
        let xs = periodic_grid(spec.length(), 64 * spec.sites);
        let vals = basis.complex_values(band, 0, &xs)?;
        let imag = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if imag > 1e-10 {
            return Err(Error::NotReal { band, imag });
        }
    }
    Ok(basis)
}

/// Overlap integral of two sampled functions over the ring by Simpson's rule.
pub fn grid_overlap(f: &[f64], g: &[f64], length: f64) -> f64 {
    let prod: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    simpson_periodic(&prod, length)
}

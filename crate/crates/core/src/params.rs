//! Hubbard parameters of the multiband model: tunnelings, on-site energies,
//! the on-site interaction tensor and the effective 1D coupling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BlochSpectrum, LatticeSpec};
use crate::quadrature::{periodic_grid, simpson_periodic};
use crate::wannier::WannierBasis;

pub const DEFAULT_POINTS_PER_SITE: usize = 2048;

/// Signed hopping `J_r = -(1/L) sum_q exp(i q r) E(q)` of band `band` over
/// `range` sites. The Hamiltonian term is `-J (b_i^+ b_{i+r} + h.c.)`.
pub fn tunneling(spectrum: &BlochSpectrum, band: usize, range: usize) -> Result<f64> {
    if band >= spectrum.bands() {
        return Err(Error::invalid("band", format!("{band} >= {}", spectrum.bands())));
    }
    let l = spectrum.spec.sites as f64;
    let sum: Complex64 = spectrum.energies[band]
        .iter()
        .enumerate()
        .map(|(j, &e)| {
            let q = std::f64::consts::PI * spectrum.spec.quasimomentum(j);
            Complex64::from_polar(e, q * range as f64)
        })
        .sum();
    Ok(-sum.re / l)
}

/// Band-averaged energy, the on-site term of every site.
pub fn onsite_energy(spectrum: &BlochSpectrum, band: usize) -> Result<f64> {
    Ok(-tunneling(spectrum, band, 0)?)
}

/// `-<w_0|h|w_range>` by Simpson quadrature of the real-space integrand.
pub fn tunneling_quadrature(
    wannier: &WannierBasis,
    band: usize,
    range: usize,
    points_per_site: usize,
) -> Result<f64> {
    let length = wannier.spec.length();
    let xs = periodic_grid(length, points_per_site * wannier.sites());
    let left = wannier.values(band, 0, &xs)?;
    let right = wannier.values(band, range % wannier.sites(), &xs)?;
    let curvature = wannier.second_derivative(band, range % wannier.sites(), &xs)?;
    let s = wannier.spec.depth;
    let pi2 = std::f64::consts::PI.powi(2);
    let integrand: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let h_w = -curvature[i] / pi2 + s * (std::f64::consts::PI * x).sin().powi(2) * right[i];
            left[i] * h_w
        })
        .collect();
    Ok(-simpson_periodic(&integrand, length))
}

/// Length of the coupling unit in lattice constants: `g` is measured in
/// `E_R / k = E_R a / pi`.
pub const COUPLING_LENGTH: f64 = 1.0 / std::f64::consts::PI;

/// Dense on-site interaction tensor, per unit coupling `g`:
/// `U^{abcd} = (1/pi) int w^a w^b w^c w^d dx` for the tensor used in
/// Hamiltonians, or the bare integral for [`interaction_integrals`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionTensor {
    pub bands: usize,
    pub values: Vec<f64>,
}

impl InteractionTensor {
    pub fn zeros(bands: usize) -> Self {
        InteractionTensor { bands, values: vec![0.0; bands.pow(4)] }
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.bands + b) * self.bands + c) * self.bands + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.values[self.index(a, b, c, d)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.index(a, b, c, d);
        self.values[i] = v;
    }

    /// Leading `bands` block of this tensor.
    pub fn truncate(&self, bands: usize) -> Self {
        let mut out = InteractionTensor::zeros(bands);
        for a in 0..bands {
            for b in 0..bands {
                for c in 0..bands {
                    for d in 0..bands {
                        out.set(a, b, c, d, self.get(a, b, c, d));
                    }
                }
            }
        }
        out
    }
}

fn tensor_on_grid(wannier: &WannierBasis, bands: usize, points_per_site: usize) -> Result<InteractionTensor> {
    let length = wannier.spec.length();
    let xs = periodic_grid(length, points_per_site * wannier.sites());
    let w: Vec<Vec<f64>> = (0..bands)
        .map(|b| wannier.values(b, 0, &xs))
        .collect::<Result<_>>()?;
    let mut tensor = InteractionTensor::zeros(bands);
    let mut prod = vec![0.0; xs.len()];
    for a in 0..bands {
        for b in 0..bands {
            for c in 0..bands {
                for d in 0..bands {
                    for (i, p) in prod.iter_mut().enumerate() {
                        *p = w[a][i] * w[b][i] * w[c][i] * w[d][i];
                    }
                    tensor.set(a, b, c, d, simpson_periodic(&prod, length));
                }
            }
        }
    }
    Ok(tensor)
}

/// Bare integrals `int w^a w^b w^c w^d dx` (units `1/a`) exactly as given by
/// quadrature, without enforcing the parity selection rule.
pub fn interaction_integrals(
    wannier: &WannierBasis,
    bands: usize,
    points_per_site: usize,
) -> Result<InteractionTensor> {
    if bands > wannier.bands() {
        return Err(Error::invalid(
            "bands",
            format!("{bands} requested, Wannier basis has {}", wannier.bands()),
        ));
    }
    if points_per_site < 2 || points_per_site % 2 != 0 {
        return Err(Error::invalid("points_per_site", "must be even and >= 2"));
    }
    let coarse = tensor_on_grid(wannier, bands, points_per_site)?;
    let fine = tensor_on_grid(wannier, bands, 2 * points_per_site)?;
    let change = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if change > 1e-8 {
        return Err(Error::Quadrature { change });
    }
    Ok(coarse)
}

/// Interaction tensor per unit `g` (`g` in `E_R / k`), with
/// parity-forbidden entries (odd band-number sum) set to exactly zero after
/// checking they vanish numerically.
pub fn interaction_tensor(
    wannier: &WannierBasis,
    bands: usize,
    points_per_site: usize,
) -> Result<InteractionTensor> {
    let mut tensor = interaction_integrals(wannier, bands, points_per_site)?;
    for a in 0..bands {
        for b in 0..bands {
            for c in 0..bands {
                for d in 0..bands {
                    if (a + b + c + d) % 2 == 1 {
                        let v = tensor.get(a, b, c, d);
                        if v.abs() > 1e-10 {
                            return Err(Error::Quadrature { change: v.abs() });
                        }
                        tensor.set(a, b, c, d, 0.0);
                    } else {
                        let v = tensor.get(a, b, c, d);
                        tensor.set(a, b, c, d, v * COUPLING_LENGTH);
                    }
                }
            }
        }
    }
    Ok(tensor)
}

/// Parameters of the multiband Bose-Hubbard Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhParams {
    pub bands: usize,
    /// Nearest-neighbour hopping per band, signed.
    pub tunneling: Vec<f64>,
    /// On-site energy per band.
    pub onsite: Vec<f64>,
    /// Interaction tensor per unit `g`.
    pub interaction: InteractionTensor,
    /// Coupling in `E_R / k`.
    pub g: f64,
}

impl BhParams {
    pub fn from_bands(
        spectrum: &BlochSpectrum,
        wannier: &WannierBasis,
        bands: usize,
        g: f64,
        points_per_site: usize,
    ) -> Result<Self> {
        if bands == 0 || bands > spectrum.bands() || bands > wannier.bands() {
            return Err(Error::invalid("bands", format!("{bands} bands not available")));
        }
        let tunneling = (0..bands)
            .map(|b| tunneling(spectrum, b, 1))
            .collect::<Result<Vec<_>>>()?;
        let onsite = (0..bands)
            .map(|b| onsite_energy(spectrum, b))
            .collect::<Result<Vec<_>>>()?;
        let interaction = interaction_tensor(wannier, bands, points_per_site)?;
        Ok(BhParams { bands, tunneling, onsite, interaction, g })
    }

    /// Solves the band problem and builds parameters in one go.
    pub fn compute(spec: &LatticeSpec, bands: usize, g: f64) -> Result<Self> {
        let spectrum = crate::lattice::solve_bloch(spec, bands)?;
        let wannier = crate::wannier::build_wannier(&spectrum)?;
        Self::from_bands(&spectrum, &wannier, bands, g, DEFAULT_POINTS_PER_SITE)
    }

    pub fn with_g(&self, g: f64) -> Self {
        BhParams { g, ..self.clone() }
    }

    /// First `bands` bands of this parameter set.
    pub fn truncate(&self, bands: usize) -> Result<Self> {
        if bands == 0 || bands > self.bands {
            return Err(Error::invalid("bands", format!("cannot truncate {} to {bands}", self.bands)));
        }
        Ok(BhParams {
            bands,
            tunneling: self.tunneling[..bands].to_vec(),
            onsite: self.onsite[..bands].to_vec(),
            interaction: self.interaction.truncate(bands),
            g: self.g,
        })
    }

    /// Physical interaction `g U^{abcd}`.
    pub fn u(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.g * self.interaction.get(a, b, c, d)
    }
}

pub const HBAR: f64 = 1.054_571_817e-34;

/// Physical context needed to express couplings in lattice units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitContext {
    pub mass_kg: f64,
    /// Laser wavelength; the lattice constant is half of it.
    pub wavelength_m: f64,
}

impl UnitContext {
    fn validate(&self) -> Result<()> {
        if !(self.mass_kg.is_finite() && self.mass_kg > 0.0) {
            return Err(Error::invalid("mass_kg", "unit context needs a positive mass"));
        }
        if !(self.wavelength_m.is_finite() && self.wavelength_m > 0.0) {
            return Err(Error::invalid("wavelength_m", "unit context needs a positive wavelength"));
        }
        Ok(())
    }

    pub fn lattice_constant(&self) -> f64 {
        0.5 * self.wavelength_m
    }

    pub fn recoil_energy(&self) -> f64 {
        let k = 2.0 * std::f64::consts::PI / self.wavelength_m;
        HBAR * HBAR * k * k / (2.0 * self.mass_kg)
    }

    /// Conversion factor from J m to `E_R / k`.
    fn coupling_unit(&self) -> f64 {
        self.recoil_energy() * self.lattice_constant() * COUPLING_LENGTH
    }
}

/// `g = 2 hbar a_s Omega` in units of `E_R / k`.
pub fn effective_g(scattering_length_m: f64, transverse_freq: f64, units: &UnitContext) -> Result<f64> {
    units.validate()?;
    if !(scattering_length_m >= 0.0 && transverse_freq >= 0.0) {
        return Err(Error::invalid("scattering_length", "a_s and Omega must be non-negative"));
    }
    Ok(2.0 * HBAR * scattering_length_m * transverse_freq / units.coupling_unit())
}

/// Inverse of [`effective_g`] for the scattering length.
pub fn scattering_length(g: f64, transverse_freq: f64, units: &UnitContext) -> Result<f64> {
    units.validate()?;
    if !(transverse_freq > 0.0) {
        return Err(Error::invalid("transverse_freq", "must be positive to invert"));
    }
    Ok(g * units.coupling_unit() / (2.0 * HBAR * transverse_freq))
}

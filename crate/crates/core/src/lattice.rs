//! Single-particle band structure of the sinusoidal lattice `s sin^2(pi x)`.
//!
//! Units: energies in recoil energies, lengths in lattice constants, so the
//! kinetic term of a plane wave `exp(i pi (q + 2n) x)` is `(q + 2n)^2`, with
//! the quasimomentum `q` measured in units of the lattice wave number.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CUTOFF: usize = 16;
pub const MIN_CUTOFF: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Lattice depth `s` in recoil energies.
    pub depth: f64,
    /// Number of sites `L` of the ring.
    pub sites: usize,
    /// Reciprocal vectors run over `-cutoff..=cutoff`.
    pub cutoff: usize,
}

impl LatticeSpec {
    pub fn new(depth: f64, sites: usize) -> Result<Self> {
        Self::with_cutoff(depth, sites, DEFAULT_CUTOFF)
    }

    pub fn with_cutoff(depth: f64, sites: usize, cutoff: usize) -> Result<Self> {
        let spec = LatticeSpec { depth, sites, cutoff };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.depth.is_finite() {
            return Err(Error::invalid("depth", "lattice depth must be finite"));
        }
        if self.depth < 0.0 {
            return Err(Error::invalid("depth", format!("{} < 0", self.depth)));
        }
        if self.sites == 0 {
            return Err(Error::invalid("sites", "need at least one site"));
        }
        if self.cutoff < MIN_CUTOFF {
            return Err(Error::invalid(
                "cutoff",
                format!("{} < {MIN_CUTOFF}", self.cutoff),
            ));
        }
        Ok(())
    }

    pub fn plane_waves(&self) -> usize {
        2 * self.cutoff + 1
    }

    /// Quasimomentum of index `j` in units of the lattice wave number,
    /// folded into `(-1, 1]`.
    pub fn quasimomentum(&self, j: usize) -> f64 {
        let l = self.sites as f64;
        let q = 2.0 * j as f64 / l;
        if 2 * j > self.sites {
            q - 2.0
        } else {
            q
        }
    }

    /// Ring length in lattice constants.
    pub fn length(&self) -> f64 {
        self.sites as f64
    }
}

/// Nearest-neighbour bonds of a chain of `sites` sites.
///
/// On a ring of two sites the single bond is listed once; a single site has
/// no bonds.
pub fn bonds(sites: usize, periodic: bool) -> Vec<(usize, usize)> {
    match sites {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => {
            let mut out: Vec<_> = (0..sites - 1).map(|k| (k, k + 1)).collect();
            if periodic {
                out.push((sites - 1, 0));
            }
            out
        }
    }
}

/// Plane-wave matrix of the Bloch problem at quasimomentum `q`:
/// diagonal `(q + 2n)^2 + s/2`, off-diagonal `-s/4`.
pub fn bloch_matrix(depth: f64, q: f64, cutoff: usize) -> DMatrix<f64> {
    let size = 2 * cutoff + 1;
    let mut h = DMatrix::zeros(size, size);
    for i in 0..size {
        let n = i as f64 - cutoff as f64;
        h[(i, i)] = (q + 2.0 * n).powi(2) + 0.5 * depth;
        if i + 1 < size {
            h[(i, i + 1)] = -0.25 * depth;
            h[(i + 1, i)] = -0.25 * depth;
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochSpectrum {
    pub spec: LatticeSpec,
    /// `energies[band][j]`.
    pub energies: Vec<Vec<f64>>,
    /// `vectors[band][j]`, real plane-wave coefficients indexed by `n + cutoff`.
    pub vectors: Vec<Vec<Vec<f64>>>,
}

impl BlochSpectrum {
    pub fn bands(&self) -> usize {
        self.energies.len()
    }

    pub fn quasimomenta(&self) -> Vec<f64> {
        (0..self.spec.sites).map(|j| self.spec.quasimomentum(j)).collect()
    }

    pub fn bandwidth(&self, band: usize) -> f64 {
        let e = &self.energies[band];
        let max = e.iter().cloned().fold(f64::MIN, f64::max);
        let min = e.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }
}

pub fn max_bands(cutoff: usize) -> usize {
    2 * cutoff - 1
}

/// Lowest `num_bands` Bloch eigenpairs at each of the `L` ring quasimomenta.
pub fn solve_bloch(spec: &LatticeSpec, num_bands: usize) -> Result<BlochSpectrum> {
    spec.validate()?;
    if num_bands == 0 {
        return Err(Error::invalid("num_bands", "need at least one band"));
    }
    if num_bands > max_bands(spec.cutoff) {
        return Err(Error::CutoffTooSmall {
            cutoff: spec.cutoff,
            bands: num_bands,
            max: max_bands(spec.cutoff),
        });
    }

    let per_q: Vec<Result<(Vec<f64>, Vec<Vec<f64>>)>> = (0..spec.sites)
        .into_par_iter()
        .map(|j| {
            let q = spec.quasimomentum(j);
            let h = bloch_matrix(spec.depth, q, spec.cutoff);
            let eig = SymmetricEigen::new(h.clone());
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let mut energies = Vec::with_capacity(num_bands);
            let mut vectors = Vec::with_capacity(num_bands);
            for &idx in order.iter().take(num_bands) {
                let e = eig.eigenvalues[idx];
                let v = eig.eigenvectors.column(idx).into_owned();
                let residual = (&h * &v - &v * e).norm();
                if residual > 1e-10 {
                    return Err(Error::NotConverged { iterations: 0, residual });
                }
                energies.push(e);
                vectors.push(v.iter().copied().collect());
            }
            Ok((energies, vectors))
        })
        .collect();

    let mut energies = vec![Vec::with_capacity(spec.sites); num_bands];
    let mut vectors = vec![Vec::with_capacity(spec.sites); num_bands];
    for item in per_q {
        let (e, v) = item?;
        for (band, (eb, vb)) in e.into_iter().zip(v).enumerate() {
            energies[band].push(eb);
            vectors[band].push(vb);
        }
    }
    Ok(BlochSpectrum { spec: *spec, energies, vectors })
}

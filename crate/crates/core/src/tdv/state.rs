use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockBasis;

/// Tolerance on mode orthonormality and amplitude norm for a valid state.
pub const STATE_TOLERANCE: f64 = 1e-8;

/// Variational state: per-site mode frames over `N_V` fixed bands plus
/// amplitudes over the reduced Fock basis of `D` modes per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdvState {
    pub sites: usize,
    /// Fixed Wannier bands `N_V` spanned by each mode.
    pub fixed_bands: usize,
    /// Variational modes per site `D`.
    pub modes: usize,
    pub particles: usize,
    /// `d[k][alpha][kappa]`, flattened.
    pub frames: Vec<Complex64>,
    pub amplitudes: Vec<Complex64>,
}

impl TdvState {
    pub fn new(
        sites: usize,
        fixed_bands: usize,
        modes: usize,
        particles: usize,
        frames: Vec<Complex64>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        if modes == 0 || modes > fixed_bands {
            return Err(Error::invalid("modes", format!("need 1 <= D <= N_V, got D={modes}, N_V={fixed_bands}")));
        }
        if frames.len() != sites * fixed_bands * modes {
            return Err(Error::Mismatch(format!(
                "frames have {} entries, expected {}",
                frames.len(),
                sites * fixed_bands * modes
            )));
        }
        let dim = FockBasis::new(sites, modes, particles)?.dim();
        if amplitudes.len() != dim {
            return Err(Error::Mismatch(format!("{} amplitudes for reduced dimension {dim}", amplitudes.len())));
        }
        Ok(TdvState { sites, fixed_bands, modes, particles, frames, amplitudes })
    }

    /// Single-mode state with site `k` holding `occupations[k]` bosons in
    /// fixed band `bands[k]`.
    pub fn fock(fixed_bands: usize, occupations: &[usize], bands: &[usize]) -> Result<Self> {
        if occupations.len() != bands.len() {
            return Err(Error::Mismatch("occupations and bands differ in length".into()));
        }
        let sites = occupations.len();
        let particles: usize = occupations.iter().sum();
        let mut frames = vec![Complex64::new(0.0, 0.0); sites * fixed_bands];
        for (k, &b) in bands.iter().enumerate() {
            if b >= fixed_bands {
                return Err(Error::invalid("bands", format!("band {b} outside {fixed_bands} fixed bands")));
            }
            frames[k * fixed_bands + b] = Complex64::new(1.0, 0.0);
        }
        let basis = FockBasis::new(sites, 1, particles)?;
        let occ: Vec<u8> = occupations.iter().map(|&n| n as u8).collect();
        let idx = basis.index(&occ).expect("occupations sum to N");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Self::new(sites, fixed_bands, 1, particles, frames, amplitudes)
    }

    /// Frames aligned with the first `D` fixed bands.
    pub fn aligned_frames(sites: usize, fixed_bands: usize, modes: usize) -> Vec<Complex64> {
        let mut f = vec![Complex64::new(0.0, 0.0); sites * fixed_bands * modes];
        for k in 0..sites {
            for m in 0..modes {
                f[(k * fixed_bands + m) * modes + m] = Complex64::new(1.0, 0.0);
            }
        }
        f
    }

    #[inline]
    pub fn d(&self, site: usize, band: usize, mode: usize) -> Complex64 {
        self.frames[(site * self.fixed_bands + band) * self.modes + mode]
    }

    /// Frame of one site as `[alpha][kappa]`.
    pub fn frame(&self, site: usize) -> &[Complex64] {
        let n = self.fixed_bands * self.modes;
        &self.frames[site * n..(site + 1) * n]
    }

    pub fn reduced_basis(&self) -> Result<FockBasis> {
        FockBasis::new(self.sites, self.modes, self.particles)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|d_k^+ d_k - 1|` entry over sites.
    pub fn frame_deviation(&self) -> (usize, f64) {
        frame_deviation(&self.frames, self.sites, self.fixed_bands, self.modes)
    }

    /// Checks mode orthonormality and amplitude normalization.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let (site, dev) = self.frame_deviation();
        if dev > tol {
            return Err(Error::FrameNotOrthonormal { site, deviation: dev });
        }
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(Error::invalid("amplitudes", format!("norm {n} is not 1")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let st: TdvState = serde_json::from_str(s)?;
        Self::new(st.sites, st.fixed_bands, st.modes, st.particles, st.frames, st.amplitudes)
    }
}

pub(crate) fn frame_deviation(frames: &[Complex64], sites: usize, nv: usize, d: usize) -> (usize, f64) {
    let mut worst = (0, 0.0);
    for k in 0..sites {
        let f = &frames[k * nv * d..(k + 1) * nv * d];
        for a in 0..d {
            for b in 0..d {
                let s: Complex64 = (0..nv).map(|al| f[al * d + a].conj() * f[al * d + b]).sum();
                let dev = (s - if a == b { 1.0 } else { 0.0 }).norm();
                if dev > worst.1 {
                    worst = (k, dev);
                }
            }
        }
    }
    worst
}

/// Modified Gram-Schmidt on the columns of each site frame.
pub(crate) fn orthonormalize(frames: &mut [Complex64], sites: usize, nv: usize, d: usize) {
    for k in 0..sites {
        let f = &mut frames[k * nv * d..(k + 1) * nv * d];
        for a in 0..d {
            for b in 0..a {
                let s: Complex64 = (0..nv).map(|al| f[al * d + b].conj() * f[al * d + a]).sum();
                for al in 0..nv {
                    let v = f[al * d + b];
                    f[al * d + a] -= s * v;
                }
            }
            let n = (0..nv).map(|al| f[al * d + a].norm_sqr()).sum::<f64>().sqrt();
            for al in 0..nv {
                f[al * d + a] /= n;
            }
        }
    }
}

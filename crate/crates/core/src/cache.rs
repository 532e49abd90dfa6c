//! On-disk cache of band structure, Wannier coefficients and Hubbard
//! parameters, keyed by `(s, L, n_max, bands)` and the quadrature density.
//!
//! Files are JSON with round-trip float formatting, so a hit re-reads the
//! exact bits that a cold computation produces.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{solve_bloch, BlochSpectrum, LatticeSpec};
use crate::params::BhParams;
use crate::wannier::{build_wannier, WannierBasis};

pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandData {
    pub version: u32,
    pub spec: LatticeSpec,
    pub bands: usize,
    pub points_per_site: usize,
    pub spectrum: BlochSpectrum,
    pub wannier: WannierBasis,
    /// Parameters per unit coupling (`g = 1`).
    pub params: BhParams,
}

impl BandData {
    pub fn compute(spec: &LatticeSpec, bands: usize, points_per_site: usize) -> Result<Self> {
        let spectrum = solve_bloch(spec, bands)?;
        let wannier = build_wannier(&spectrum)?;
        let params = BhParams::from_bands(&spectrum, &wannier, bands, 1.0, points_per_site)?;
        Ok(BandData { version: CACHE_VERSION, spec: *spec, bands, points_per_site, spectrum, wannier, params })
    }
}

/// File name for a cache key; the depth is encoded by its bit pattern.
pub fn cache_file(dir: &Path, spec: &LatticeSpec, bands: usize, points_per_site: usize) -> PathBuf {
    dir.join(format!(
        "bands-v{CACHE_VERSION}-s{:016x}-L{}-n{}-b{}-q{}.json",
        spec.depth.to_bits(),
        spec.sites,
        spec.cutoff,
        bands,
        points_per_site
    ))
}

/// Loads cached band data, computing and storing it on a miss. Returns
/// the data and whether it came from the cache. Unreadable or stale
/// entries are recomputed and overwritten.
pub fn load_or_compute(
    dir: Option<&Path>,
    spec: &LatticeSpec,
    bands: usize,
    points_per_site: usize,
) -> Result<(BandData, bool)> {
    let Some(dir) = dir else {
        return Ok((BandData::compute(spec, bands, points_per_site)?, false));
    };
    let path = cache_file(dir, spec, bands, points_per_site);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(data) = serde_json::from_str::<BandData>(&text) {
            if data.version == CACHE_VERSION
                && data.spec == *spec
                && data.bands == bands
                && data.points_per_site == points_per_site
            {
                return Ok((data, true));
            }
        }
    }
    let data = BandData::compute(spec, bands, points_per_site)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    std::fs::write(&path, serde_json::to_string(&data)?).map_err(|e| Error::io(&path, e))?;
    Ok((data, false))
}

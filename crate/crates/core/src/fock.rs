//! Number-conserving multiband Fock basis with lexicographic combinatorial
//! ranking.
//!
//! A state is an occupation array over modes `site * bands + band`. States
//! are ordered lexicographically ascending on that array, so `(0, .., 0, N)`
//! has rank 0.

use crate::error::{Error, Result};

pub const DEFAULT_DIMENSION_LIMIT: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Applies `b^+` or `b` on `mode` in place and returns the matrix element.
/// Annihilating an empty mode returns `None` and leaves `occ` untouched.
pub fn apply_ladder(occ: &mut [u8], mode: usize, kind: Ladder) -> Option<f64> {
    let n = occ[mode];
    match kind {
        Ladder::Create => {
            occ[mode] = n + 1;
            Some(((n + 1) as f64).sqrt())
        }
        Ladder::Annihilate => {
            if n == 0 {
                None
            } else {
                occ[mode] = n - 1;
                Some((n as f64).sqrt())
            }
        }
    }
}

/// `C(n, k)` as `u128`; the exact count of Fock states before limits apply.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    sites: usize,
    bands: usize,
    particles: usize,
    dim: usize,
    /// flat `dim x modes` occupation table
    states: Vec<u8>,
    /// `offsets[(i * (N+1) + rem) * (N+1) + n]`: rank contribution of
    /// putting `n` particles in mode `i` with `rem` left to place.
    offsets: Vec<usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.sites == other.sites && self.bands == other.bands && self.particles == other.particles
    }
}

impl FockBasis {
    pub fn new(sites: usize, bands: usize, particles: usize) -> Result<Self> {
        Self::with_limit(sites, bands, particles, DEFAULT_DIMENSION_LIMIT)
    }

    pub fn with_limit(sites: usize, bands: usize, particles: usize, limit: usize) -> Result<Self> {
        if sites == 0 || bands == 0 || particles == 0 {
            return Err(Error::invalid("basis", "sites, bands and particles must be positive"));
        }
        if particles > u8::MAX as usize - 1 {
            return Err(Error::invalid("particles", "at most 254 particles"));
        }
        let modes = sites * bands;
        let dim128 = binomial((particles + modes - 1) as u64, particles as u64);
        if dim128 > limit as u128 {
            return Err(Error::DimensionLimit { dim: dim128, limit });
        }
        let dim = dim128 as usize;

        // count[m][p]: states of p particles in m modes
        let np = particles + 1;
        let mut count = vec![vec![0usize; np]; modes + 1];
        count[0][0] = 1;
        for m in 1..=modes {
            for p in 0..np {
                count[m][p] = (0..=p).map(|v| count[m - 1][p - v]).sum();
            }
        }
        let mut offsets = vec![0usize; modes * np * np];
        for i in 0..modes {
            let tail = modes - i - 1;
            for rem in 0..np {
                let mut acc = 0;
                for n in 0..=rem {
                    offsets[(i * np + rem) * np + n] = acc;
                    acc += count[tail][rem - n];
                }
            }
        }

        let mut states = Vec::with_capacity(dim * modes);
        let mut occ = vec![0u8; modes];
        enumerate(&mut occ, 0, particles, &mut states);
        debug_assert_eq!(states.len(), dim * modes);

        Ok(FockBasis { sites, bands, particles, dim, states, offsets })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn modes(&self) -> usize {
        self.sites * self.bands
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn mode(&self, site: usize, band: usize) -> usize {
        site * self.bands + band
    }

    #[inline]
    pub fn state(&self, index: usize) -> &[u8] {
        let m = self.modes();
        &self.states[index * m..(index + 1) * m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.states.chunks(self.modes())
    }

    /// Rank of an occupation array, `None` if it is not in this basis.
    pub fn index(&self, occ: &[u8]) -> Option<usize> {
        if occ.len() != self.modes() {
            return None;
        }
        let np = self.particles + 1;
        let mut rem = self.particles;
        let mut rank = 0;
        for (i, &n) in occ.iter().enumerate() {
            let n = n as usize;
            if n > rem {
                return None;
            }
            if i + 1 == occ.len() {
                if n != rem {
                    return None;
                }
                break;
            }
            rank += self.offsets[(i * np + rem) * np + n];
            rem -= n;
        }
        Some(rank)
    }

    /// `b^+_to b_from` acting on basis state `index`.
    pub fn hop(&self, index: usize, from: usize, to: usize) -> Option<(usize, f64)> {
        let mut occ = self.state(index).to_vec();
        let a = apply_ladder(&mut occ, from, Ladder::Annihilate)?;
        let c = apply_ladder(&mut occ, to, Ladder::Create)?;
        Some((self.index(&occ).expect("particle number conserved"), a * c))
    }

    /// Occupation of `(site, band)` in state `index`.
    pub fn occupation(&self, index: usize, site: usize, band: usize) -> u8 {
        self.state(index)[self.mode(site, band)]
    }

    pub fn site_occupation(&self, index: usize, site: usize) -> usize {
        let s = self.state(index);
        s[site * self.bands..(site + 1) * self.bands]
            .iter()
            .map(|&n| n as usize)
            .sum()
    }

    /// Index of the state with `per_site[k]` particles on site `k`, all in
    /// band `band_of[k]`.
    pub fn site_band_state(&self, per_site: &[usize], band_of: &[usize]) -> Result<usize> {
        if per_site.len() != self.sites || band_of.len() != self.sites {
            return Err(Error::Mismatch("one occupation and band per site required".into()));
        }
        let mut occ = vec![0u8; self.modes()];
        for k in 0..self.sites {
            if band_of[k] >= self.bands {
                return Err(Error::invalid("band", format!("band {} >= {}", band_of[k], self.bands)));
            }
            occ[self.mode(k, band_of[k])] = per_site[k] as u8;
        }
        self.index(&occ)
            .ok_or_else(|| Error::Mismatch(format!("occupations {per_site:?} do not sum to {}", self.particles)))
    }
}

fn enumerate(occ: &mut [u8], pos: usize, rem: usize, out: &mut Vec<u8>) {
    if pos + 1 == occ.len() {
        occ[pos] = rem as u8;
        out.extend_from_slice(occ);
        return;
    }
    for v in 0..=rem {
        occ[pos] = v as u8;
        enumerate(occ, pos + 1, rem - v, out);
    }
    occ[pos] = 0;
}

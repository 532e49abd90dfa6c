//! Hubbard parameters projected onto the variational modes, reduced
//! densities, the energy functional and its gradient with respect to the
//! mode coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::space::{apply_scaled, expectation, ReducedSpace};
use crate::error::{Error, Result};
use crate::params::BhParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shape of a frame array `d[k][alpha][kappa]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub sites: usize,
    pub nv: usize,
    pub d: usize,
}

impl Layout {
    #[inline]
    pub fn at(&self, k: usize, a: usize, m: usize) -> usize {
        (k * self.nv + a) * self.d + m
    }

    pub fn len(&self) -> usize {
        self.sites * self.nv * self.d
    }
}

/// Per-site contraction `A[ab][mn] = sum_cd U^{abcd} d^{cm} d^{dn}` (per unit g).
fn half_contraction(params: &BhParams, lay: Layout, frames: &[Complex64], k: usize) -> Vec<Complex64> {
    let (nv, d) = (lay.nv, lay.d);
    let u = &params.interaction.values;
    let site = &frames[lay.at(k, 0, 0)..lay.at(k, 0, 0) + nv * d];
    // t[(a b c) n] = sum_e U^{abce} d^{e n}
    let mut t = vec![ZERO; nv * nv * nv * d];
    for (abc, row) in u.chunks_exact(nv).enumerate() {
        let out = &mut t[abc * d..(abc + 1) * d];
        for (e, &x) in row.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (o, f) in out.iter_mut().zip(&site[e * d..(e + 1) * d]) {
                *o += f * x;
            }
        }
    }
    // out[(a b) m n] = sum_c d^{c m} t[(a b c) n]
    let mut out = vec![ZERO; nv * nv * d * d];
    for ab in 0..nv * nv {
        let o = &mut out[ab * d * d..(ab + 1) * d * d];
        for c in 0..nv {
            let tn = &t[(ab * nv + c) * d..(ab * nv + c + 1) * d];
            for m in 0..d {
                let dc = site[c * d + m];
                for (x, tv) in o[m * d..(m + 1) * d].iter_mut().zip(tn) {
                    *x += dc * tv;
                }
            }
        }
    }
    out
}

/// Hubbard parameters in the variational mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedParams {
    pub sites: usize,
    pub modes: usize,
    /// `E_k^{(mu nu)}` at `(k D + mu) D + nu`.
    pub onsite: Vec<Complex64>,
    /// `J_{kl}^{(mu nu)}` per bond `(k, l)`; enters `H` as `-J b+_{k mu} b_{l nu} + h.c.`
    pub hopping: Vec<Complex64>,
    /// `g U_k^{(klmn)}` at `site D^4 + ((k D + l) D + m) D + n`.
    pub interaction: Vec<Complex64>,
    half: Vec<Vec<Complex64>>,
    g: f64,
}

pub(crate) fn project(
    params: &BhParams,
    g: f64,
    space: &ReducedSpace,
    lay: Layout,
    frames: &[Complex64],
) -> ProjectedParams {
    let (nv, d) = (lay.nv, lay.d);
    let mut onsite = vec![ZERO; lay.sites * d * d];
    for k in 0..lay.sites {
        for m in 0..d {
            for n in 0..d {
                onsite[(k * d + m) * d + n] = (0..nv)
                    .map(|a| frames[lay.at(k, a, m)].conj() * params.onsite[a] * frames[lay.at(k, a, n)])
                    .sum();
            }
        }
    }
    let mut hopping = vec![ZERO; space.bonds().len() * d * d];
    for (b, &(k, l)) in space.bonds().iter().enumerate() {
        for m in 0..d {
            for n in 0..d {
                hopping[(b * d + m) * d + n] = (0..nv)
                    .map(|a| frames[lay.at(k, a, m)].conj() * params.tunneling[a] * frames[lay.at(l, a, n)])
                    .sum();
            }
        }
    }
    let d4 = d * d * d * d;
    let mut interaction = vec![ZERO; lay.sites * d4];
    let mut half = Vec::with_capacity(lay.sites);
    for k in 0..lay.sites {
        let h = half_contraction(params, lay, frames, k);
        for idx in 0..d4 {
            let (p, q, m, n) = (idx / (d * d * d), (idx / (d * d)) % d, (idx / d) % d, idx % d);
            let mut acc = ZERO;
            for a in 0..nv {
                let da = frames[lay.at(k, a, p)].conj();
                for b in 0..nv {
                    acc += da * frames[lay.at(k, b, q)].conj() * h[((a * nv + b) * d + m) * d + n];
                }
            }
            interaction[k * d4 + idx] = g * acc;
        }
        half.push(h);
    }
    ProjectedParams { sites: lay.sites, modes: d, onsite, hopping, interaction, half, g }
}

/// One- and two-body reduced densities over the variational modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Densities {
    /// `<b+_p b_q>` over modes `p = site D + kappa`.
    pub one: Vec<Complex64>,
    /// `<b+_k b+_l b_m b_n>` per site, same indexing as the interaction.
    pub two: Vec<Complex64>,
    modes: usize,
}

impl Densities {
    pub fn one_body(&self, p: usize, q: usize) -> Complex64 {
        self.one[p * self.modes + q]
    }
}

pub(crate) fn densities(space: &ReducedSpace, c: &[Complex64]) -> Densities {
    let m = space.sites() * space.modes();
    let mut one = vec![ZERO; m * m];
    for p in 0..m {
        for q in 0..m {
            one[p * m + q] = expectation(space.one_body(p, q), c);
        }
    }
    let d = space.modes();
    let d4 = d * d * d * d;
    let two = (0..space.sites() * d4)
        .map(|i| expectation(space.two_body(i / d4, i % d4), c))
        .collect();
    Densities { one, two, modes: m }
}

/// `H_V x` in the reduced space, minus `offset x`.
pub(crate) fn apply_hamiltonian(
    space: &ReducedSpace,
    pp: &ProjectedParams,
    offset: f64,
    x: &[Complex64],
    y: &mut [Complex64],
) {
    let d = pp.modes;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = -offset * xi;
    }
    for k in 0..pp.sites {
        for m in 0..d {
            for n in 0..d {
                apply_scaled(space.one_body(k * d + m, k * d + n), pp.onsite[(k * d + m) * d + n], x, y);
            }
        }
    }
    for (b, &(k, l)) in space.bonds().iter().enumerate() {
        for m in 0..d {
            for n in 0..d {
                let j = pp.hopping[(b * d + m) * d + n];
                apply_scaled(space.one_body(k * d + m, l * d + n), -j, x, y);
                apply_scaled(space.one_body(l * d + n, k * d + m), -j.conj(), x, y);
            }
        }
    }
    let d4 = d * d * d * d;
    for k in 0..pp.sites {
        for idx in 0..d4 {
            apply_scaled(space.two_body(k, idx), 0.5 * pp.interaction[k * d4 + idx], x, y);
        }
    }
}

/// `<H_V>` from densities.
pub(crate) fn energy(space: &ReducedSpace, pp: &ProjectedParams, rho: &Densities) -> f64 {
    let d = pp.modes;
    let mut e = ZERO;
    for k in 0..pp.sites {
        for m in 0..d {
            for n in 0..d {
                e += pp.onsite[(k * d + m) * d + n] * rho.one_body(k * d + m, k * d + n);
            }
        }
    }
    for (b, &(k, l)) in space.bonds().iter().enumerate() {
        for m in 0..d {
            for n in 0..d {
                let j = pp.hopping[(b * d + m) * d + n];
                e -= j * rho.one_body(k * d + m, l * d + n) + j.conj() * rho.one_body(l * d + n, k * d + m);
            }
        }
    }
    e += pp.interaction.iter().zip(&rho.two).map(|(u, r)| u * r).sum::<Complex64>() * 0.5;
    e.re
}

/// Wirtinger derivative `dE / d conj(d_k^{a kappa})` at fixed amplitudes.
pub(crate) fn gradient(
    params: &BhParams,
    space: &ReducedSpace,
    lay: Layout,
    frames: &[Complex64],
    pp: &ProjectedParams,
    rho: &Densities,
) -> Vec<Complex64> {
    let (nv, d) = (lay.nv, lay.d);
    let mut grad = vec![ZERO; lay.len()];
    for k in 0..lay.sites {
        for a in 0..nv {
            for p in 0..d {
                let mut acc = ZERO;
                for n in 0..d {
                    acc += params.onsite[a] * frames[lay.at(k, a, n)] * rho.one_body(k * d + p, k * d + n);
                }
                grad[lay.at(k, a, p)] = acc;
            }
        }
    }
    for &(k, l) in space.bonds() {
        for a in 0..nv {
            let j = params.tunneling[a];
            for p in 0..d {
                let mut gk = ZERO;
                let mut gl = ZERO;
                for n in 0..d {
                    gk += frames[lay.at(l, a, n)] * rho.one_body(k * d + p, l * d + n);
                    gl += frames[lay.at(k, a, n)] * rho.one_body(l * d + p, k * d + n);
                }
                grad[lay.at(k, a, p)] -= j * gk;
                grad[lay.at(l, a, p)] -= j * gl;
            }
        }
    }
    if pp.g != 0.0 {
        let d4 = d * d * d * d;
        for k in 0..lay.sites {
            let h = &pp.half[k];
            let two = &rho.two[k * d4..(k + 1) * d4];
            for a in 0..nv {
                for p in 0..d {
                    let mut acc = ZERO;
                    for q in 0..d {
                        for m in 0..d {
                            for n in 0..d {
                                let gam = two[((p * d + q) * d + m) * d + n];
                                if gam == ZERO {
                                    continue;
                                }
                                let mut b_sum = ZERO;
                                for b in 0..nv {
                                    b_sum += frames[lay.at(k, b, q)].conj() * h[((a * nv + b) * d + m) * d + n];
                                }
                                acc += b_sum * gam;
                            }
                        }
                    }
                    grad[lay.at(k, a, p)] += pp.g * acc;
                }
            }
        }
    }
    grad
}

/// Time-dependent single-mode Hubbard parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdvParameters {
    /// `J_{kl}(t)` per bond, signed.
    pub hopping: Vec<Complex64>,
    pub onsite: Vec<f64>,
    /// `U_kkkk(t)` including `g`.
    pub interaction: Vec<f64>,
}

/// One-body density matrix over sites and on-site pair densities of a
/// single-mode state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdvDensities {
    pub sites: usize,
    /// `rho_kl`, row-major `L x L`.
    pub rho1: Vec<Complex64>,
    /// `rho_kkkk`.
    pub rho2_diag: Vec<f64>,
}

impl TdvDensities {
    pub fn rho(&self, k: usize, l: usize) -> Complex64 {
        self.rho1[k * self.sites + l]
    }
}

pub(crate) fn single_mode_check(modes: usize) -> Result<()> {
    if modes != 1 {
        return Err(Error::invalid("modes", format!("single-mode operation needs D = 1, got {modes}")));
    }
    Ok(())
}

pub(crate) fn to_single_mode_params(pp: &ProjectedParams) -> TdvParameters {
    TdvParameters {
        hopping: pp.hopping.clone(),
        onsite: pp.onsite.iter().map(|e| e.re).collect(),
        interaction: pp.interaction.iter().map(|u| u.re).collect(),
    }
}

pub(crate) fn to_single_mode_densities(sites: usize, rho: &Densities) -> TdvDensities {
    TdvDensities { sites, rho1: rho.one.clone(), rho2_diag: rho.two.iter().map(|r| r.re).collect() }
}

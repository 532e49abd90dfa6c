//! Variational ground states. For fixed mode frames the amplitudes are the
//! lowest eigenvector of the reduced Hamiltonian; the frames descend along
//! preconditioned, projected conjugate gradients of that lowest eigenvalue
//! and are retracted by Gram-Schmidt. Starts are seeded deterministically.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::TdvModel;
use super::projection::{apply_hamiltonian, densities, gradient, project, Layout};
use super::state::{orthonormalize, TdvState};
use crate::error::Result;
use crate::lanczos::{lowest_eigenpair_complex, LanczosOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// Converged once a sweep lowers the energy by less than this...
    pub tolerance: f64,
    /// ...and the projected frame gradient is below this.
    pub gradient_tolerance: f64,
    /// Frames for start 0; aligned with the lowest bands when absent.
    pub initial_frames: Option<Vec<Complex64>>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            starts: 16,
            seed: 0,
            max_sweeps: 20_000,
            tolerance: 1e-10,
            gradient_tolerance: 1e-6,
            initial_frames: None,
        }
    }
}

/// Energy per sweep of one start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartLog {
    pub start: usize,
    pub seed: u64,
    pub energies: Vec<f64>,
    pub gradient_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub state: TdvState,
    /// False when no start met the convergence criterion; the best
    /// unconverged result is returned instead.
    pub converged: bool,
    pub best_start: usize,
    pub log: Vec<StartLog>,
}

fn projected_gradient(lay: Layout, frames: &[Complex64], grad: &[Complex64]) -> Vec<Complex64> {
    let (nv, d) = (lay.nv, lay.d);
    let mut p = grad.to_vec();
    for k in 0..lay.sites {
        for m in 0..d {
            let s: Vec<Complex64> = (0..d)
                .map(|n| (0..nv).map(|a| frames[lay.at(k, a, n)].conj() * grad[lay.at(k, a, m)]).sum())
                .collect();
            for a in 0..nv {
                for n in 0..d {
                    p[lay.at(k, a, m)] -= frames[lay.at(k, a, n)] * s[n];
                }
            }
        }
    }
    p
}

/// Diagonal curvature estimate `gamma_kk (E^a - lambda_k)` per frame entry,
/// with `lambda_k` the mode's Rayleigh energy; the band gaps dominate the
/// Hessian, so dividing by it equalizes the descent rates.
fn precondition(
    lay: Layout,
    onsite: &[f64],
    frames: &[Complex64],
    grad: &[Complex64],
    rho: &super::projection::Densities,
    p: &[Complex64],
) -> Vec<Complex64> {
    let (nv, d) = (lay.nv, lay.d);
    let mut out = p.to_vec();
    for k in 0..lay.sites {
        for m in 0..d {
            let gam = rho.one_body(k * d + m, k * d + m).re;
            if gam < 1e-12 {
                continue;
            }
            let lambda = (0..nv)
                .map(|a| (frames[lay.at(k, a, m)].conj() * grad[lay.at(k, a, m)]).re)
                .sum::<f64>()
                / gam;
            for a in 0..nv {
                out[lay.at(k, a, m)] /= gam * (onsite[a] - lambda).max(1.0);
            }
        }
    }
    projected_gradient(lay, frames, &out)
}

fn start_frames(model: &TdvModel, opts: &MinimizeOptions, start: usize) -> (u64, Vec<Complex64>) {
    let lay = model.layout();
    let seed = opts.seed.wrapping_add(start as u64);
    let mut frames = match (&opts.initial_frames, start) {
        (Some(f), 0) if f.len() == lay.len() => f.clone(),
        _ => TdvState::aligned_frames(lay.sites, lay.nv, lay.d),
    };
    if start > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in frames.iter_mut() {
            *v += Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    orthonormalize(&mut frames, lay.sites, lay.nv, lay.d);
    (seed, frames)
}

fn minimize_one(model: &TdvModel, g: f64, opts: &MinimizeOptions, start: usize) -> Result<(StartLog, TdvState, f64)> {
    let lay = model.layout();
    let space = model.space();
    let params = model.params();
    let (seed, mut frames) = start_frames(model, opts, start);
    let lanczos = LanczosOptions { krylov: 30, tolerance: 1e-10, seed, ..Default::default() };
    // exact diagonalization in the amplitudes for fixed frames
    let solve = |frames: &[Complex64], guess: Option<&[Complex64]>| -> Result<(f64, Vec<Complex64>)> {
        let pp = project(params, g, space, lay, frames);
        lowest_eigenpair_complex(space.dim(), |x, y| apply_hamiltonian(space, &pp, 0.0, x, y), guess, &lanczos)
    };
    let (mut e, mut c) = solve(&frames, None)?;
    let mut energies = vec![e];
    let mut eta = 0.5;
    let mut converged = false;
    let mut gnorm = f64::INFINITY;
    let mut decrease = f64::INFINITY;
    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>, f64)> = None; // (p, dir, <z, p>)

    for _ in 0..opts.max_sweeps {
        let pp = project(params, g, space, lay, &frames);
        let rho = densities(space, &c);
        let grad = gradient(params, space, lay, &frames, &pp, &rho);
        let p = projected_gradient(lay, &frames, &grad);
        gnorm = p.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if gnorm < 1e-13 || (decrease.abs() < opts.tolerance && gnorm < opts.gradient_tolerance) {
            converged = true;
            break;
        }
        // preconditioned Polak-Ribiere direction, transported by projection
        let z = precondition(lay, &params.onsite, &frames, &grad, &rho, &p);
        let zp: f64 = p.iter().zip(&z).map(|(a, b)| (a.conj() * b).re).sum();
        let mut dir = z.clone();
        if let Some((p_old, dir_old, zp_old)) = &prev {
            let p_old = projected_gradient(lay, &frames, p_old);
            let num: f64 = z.iter().zip(p.iter().zip(&p_old)).map(|(zi, (a, b))| (zi.conj() * (a - b)).re).sum();
            let beta = (num / zp_old).max(0.0);
            let carried = projected_gradient(lay, &frames, dir_old);
            dir.iter_mut().zip(&carried).for_each(|(d, o)| *d += o * beta);
        }
        let mut slope: f64 = 2.0 * p.iter().zip(&dir).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        if slope <= 0.0 {
            dir = z.clone();
            slope = 2.0 * zp;
        }
        // Armijo backtracking on the reduced energy
        let mut accepted = None;
        while eta > 1e-16 {
            let mut trial: Vec<Complex64> = frames.iter().zip(&dir).map(|(f, v)| f - v * eta).collect();
            orthonormalize(&mut trial, lay.sites, lay.nv, lay.d);
            let (et, ct) = solve(&trial, Some(&c))?;
            if et <= e - 1e-4 * eta * slope {
                accepted = Some((trial, et, ct));
                break;
            }
            eta *= 0.5;
        }
        let Some((trial, et, ct)) = accepted else {
            // no descent left at machine precision
            converged = decrease.abs() < opts.tolerance || gnorm < opts.gradient_tolerance;
            break;
        };
        decrease = e - et;
        frames = trial;
        e = et;
        c = ct;
        energies.push(e);
        eta = (eta * 2.0).min(4.0);
        prev = Some((p, dir, zp));
    }
    let state = TdvState {
        sites: lay.sites,
        fixed_bands: lay.nv,
        modes: lay.d,
        particles: model.particles(),
        frames,
        amplitudes: c,
    };
    Ok((StartLog { start, seed, energies, gradient_norm: gnorm, converged }, state, e))
}

impl TdvModel {
    /// Minimizes `<H_V>` at coupling `g` over frames and amplitudes.
    pub fn ground_state(&self, g: f64, opts: &MinimizeOptions) -> Result<GroundState> {
        let starts = opts.starts.max(1);
        let runs = (0..starts)
            .into_par_iter()
            .map(|s| minimize_one(self, g, opts, s))
            .collect::<Result<Vec<_>>>()?;
        let any_converged = runs.iter().any(|r| r.0.converged);
        let (best_start, _) = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.0.converged || !any_converged)
            .min_by(|a, b| a.1 .2.total_cmp(&b.1 .2).then(a.0.cmp(&b.0)))
            .expect("at least one start");
        let mut log = Vec::with_capacity(starts);
        let mut best = None;
        for (i, (l, st, e)) in runs.into_iter().enumerate() {
            if i == best_start {
                best = Some((st, e));
            }
            log.push(l);
        }
        let (state, energy) = best.expect("best start present");
        Ok(GroundState { energy, state, converged: any_converged, best_start, log })
    }
}

/// Frames with `modes` columns whose first column is the single mode of
/// `state`; the rest start along the lowest bands and are orthonormalized.
pub fn widen_frames(state: &TdvState, modes: usize) -> Result<Vec<Complex64>> {
    if state.modes != 1 || modes == 0 || modes > state.fixed_bands {
        return Err(crate::error::Error::invalid("modes", "need a single-mode state and 1 <= D <= N_V"));
    }
    let nv = state.fixed_bands;
    let mut frames = TdvState::aligned_frames(state.sites, nv, modes);
    for k in 0..state.sites {
        for a in 0..nv {
            frames[(k * nv + a) * modes] = state.d(k, a, 0);
        }
    }
    orthonormalize(&mut frames, state.sites, nv, modes);
    Ok(frames)
}

/// Variational ground state of `L` sites with `N` particles, `D` modes
/// per site over the bands of `params`, at the coupling stored in `params`.
pub fn tdv_ground_state(
    params: &crate::params::BhParams,
    sites: usize,
    particles: usize,
    modes: usize,
    periodic: bool,
    opts: &MinimizeOptions,
) -> Result<GroundState> {
    TdvModel::new(params, sites, particles, modes, periodic)?.ground_state(params.g, opts)
}

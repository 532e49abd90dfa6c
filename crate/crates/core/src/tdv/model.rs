use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::projection::{
    apply_hamiltonian, densities, energy, gradient, project, single_mode_check, to_single_mode_densities,
    to_single_mode_params, Densities, Layout, ProjectedParams, TdvDensities, TdvParameters,
};
use super::space::ReducedSpace;
use super::state::{frame_deviation, TdvState};
use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::params::BhParams;
use crate::propagate::{rk4_step, step_count, Coupling, Dynamics, EvolveSettings, Rk4Work, Trajectory};

/// Site densities below this abort the mode equations (they divide by it).
pub const EMPTY_SITE_THRESHOLD: f64 = 1e-12;

/// A variational model: fixed-band parameters and the reduced Fock space
/// of `D` modes per site.
#[derive(Debug, Clone)]
pub struct TdvModel {
    params: BhParams,
    space: ReducedSpace,
    lay: Layout,
}

impl TdvModel {
    /// `params.bands` sets `N_V`; the stored coupling is ignored in favour
    /// of the `g` passed to each operation.
    pub fn new(params: &BhParams, sites: usize, particles: usize, modes: usize, periodic: bool) -> Result<Self> {
        if modes == 0 || modes > params.bands {
            return Err(Error::invalid("modes", format!("need 1 <= D <= N_V = {}", params.bands)));
        }
        let space = ReducedSpace::new(sites, modes, particles, periodic)?;
        let lay = Layout { sites, nv: params.bands, d: modes };
        Ok(TdvModel { params: params.clone(), space, lay })
    }

    pub fn params(&self) -> &BhParams {
        &self.params
    }

    pub fn space(&self) -> &ReducedSpace {
        &self.space
    }

    pub fn sites(&self) -> usize {
        self.lay.sites
    }

    pub fn fixed_bands(&self) -> usize {
        self.lay.nv
    }

    pub fn modes(&self) -> usize {
        self.lay.d
    }

    pub fn particles(&self) -> usize {
        self.space.particles()
    }

    pub(crate) fn layout(&self) -> Layout {
        self.lay
    }

    pub(crate) fn check(&self, state: &TdvState) -> Result<()> {
        if state.sites != self.lay.sites
            || state.fixed_bands != self.lay.nv
            || state.modes != self.lay.d
            || state.particles != self.space.particles()
        {
            return Err(Error::Mismatch(format!(
                "state (L={}, N_V={}, D={}, N={}) does not fit model (L={}, N_V={}, D={}, N={})",
                state.sites,
                state.fixed_bands,
                state.modes,
                state.particles,
                self.lay.sites,
                self.lay.nv,
                self.lay.d,
                self.space.particles()
            )));
        }
        self.space.check_len(&state.amplitudes)
    }

    pub fn projected(&self, state: &TdvState, g: f64) -> Result<ProjectedParams> {
        self.check(state)?;
        Ok(project(&self.params, g, &self.space, self.lay, &state.frames))
    }

    pub fn reduced_densities(&self, state: &TdvState) -> Result<Densities> {
        self.check(state)?;
        Ok(densities(&self.space, &state.amplitudes))
    }

    /// Instantaneous single-mode Hubbard parameters.
    pub fn parameters(&self, state: &TdvState, g: f64) -> Result<TdvParameters> {
        single_mode_check(self.lay.d)?;
        let (site, dev) = state.frame_deviation();
        if dev > super::state::STATE_TOLERANCE {
            return Err(Error::FrameNotOrthonormal { site, deviation: dev });
        }
        Ok(to_single_mode_params(&self.projected(state, g)?))
    }

    pub fn densities(&self, state: &TdvState) -> Result<TdvDensities> {
        single_mode_check(self.lay.d)?;
        Ok(to_single_mode_densities(self.lay.sites, &self.reduced_densities(state)?))
    }

    /// Variational energy `<H_V>` at coupling `g`.
    pub fn energy(&self, state: &TdvState, g: f64) -> Result<f64> {
        let pp = self.projected(state, g)?;
        let rho = densities(&self.space, &state.amplitudes);
        Ok(energy(&self.space, &pp, &rho) / state.norm().powi(2))
    }

    /// `dE / d conj(d)` at fixed amplitudes.
    pub fn energy_gradient(&self, state: &TdvState, g: f64) -> Result<Vec<Complex64>> {
        let pp = self.projected(state, g)?;
        let rho = densities(&self.space, &state.amplitudes);
        Ok(gradient(&self.params, &self.space, self.lay, &state.frames, &pp, &rho))
    }

    fn rhs_into(&self, g: f64, offset: f64, y: &[Complex64], dy: &mut [Complex64]) -> Result<()> {
        let n = self.lay.len();
        let (fr, c) = y.split_at(n);
        let (dfr, dc) = dy.split_at_mut(n);
        let pp = project(&self.params, g, &self.space, self.lay, fr);
        let rho = densities(&self.space, c);
        let grad = gradient(&self.params, &self.space, self.lay, fr, &pp, &rho);
        let nv = self.lay.nv;
        let minus_i = Complex64::new(0.0, -1.0);
        for k in 0..self.lay.sites {
            let rkk = rho.one_body(k, k).re;
            if rkk < EMPTY_SITE_THRESHOLD {
                return Err(Error::EmptySite { site: k, density: rkk });
            }
            let f = &grad[k * nv..(k + 1) * nv];
            let d = &fr[k * nv..(k + 1) * nv];
            let s: Complex64 = d.iter().zip(f).map(|(a, b)| a.conj() * b).sum::<Complex64>() / rkk;
            for a in 0..nv {
                dfr[k * nv + a] = minus_i * (f[a] / rkk - d[a] * s);
            }
        }
        apply_hamiltonian(&self.space, &pp, offset, c, dc);
        dc.iter_mut().for_each(|v| *v *= minus_i);
        Ok(())
    }

    /// Time derivatives `(d_dot, C_dot)` of a single-mode state.
    pub fn rhs(&self, state: &TdvState, g: f64, offset: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        single_mode_check(self.lay.d)?;
        self.check(state)?;
        let y = pack(state);
        let mut dy = vec![Complex64::new(0.0, 0.0); y.len()];
        self.rhs_into(g, offset, &y, &mut dy)?;
        let c = dy.split_off(self.lay.len());
        Ok((dy, c))
    }

    /// Evolves a single-mode state under `g(t)`.
    pub fn evolve<C: Coupling>(
        &self,
        state0: &TdvState,
        coupling: &C,
        t_final: f64,
        settings: &EvolveSettings,
    ) -> Result<TdvTrajectory> {
        single_mode_check(self.lay.d)?;
        self.check(state0)?;
        settings.validate()?;
        state0.validate(super::state::STATE_TOLERANCE)?;
        let offset = match settings.energy_offset {
            Some(e) => e,
            None => self.energy(state0, coupling.g(0.0))?,
        };
        let sys = TdvDynamics { model: self, coupling, offset };
        let (steps, dt) = step_count(t_final, settings.dt);
        let n = self.lay.len();
        let mut y = pack(state0);
        let mut work = Rk4Work::new(y.len());
        let mut traj = Trajectory { min_fidelity: 1.0, ..Default::default() };
        let mut max_frame_drift: f64 = 0.0;

        let observe = |traj: &mut Trajectory, t: f64, y: &[Complex64]| -> Result<()> {
            let st = self.unpack(y);
            let rho = densities(&self.space, &st.amplitudes);
            traj.times.push(t);
            for k in 0..self.lay.sites {
                traj.push(&format!("site_{}", k + 1), rho.one_body(k, k).re);
            }
            for a in 0..self.lay.nv {
                let p: f64 = (0..self.lay.sites)
                    .map(|k| rho.one_body(k, k).re * st.d(k, a, 0).norm_sqr())
                    .sum();
                traj.push(&format!("band_{}", a + 1), p);
            }
            traj.push("fidelity", overlap_in(self.space.basis(), state0, &st)?.norm());
            traj.push("norm", st.norm());
            if settings.record_energy {
                traj.push("energy", self.energy(&st, coupling.g(t))?);
            }
            Ok(())
        };

        observe(&mut traj, 0.0, &y)?;
        if settings.snapshot_every > 0 {
            traj.snapshots.push((0.0, y.clone()));
        }
        for step in 1..=steps {
            rk4_step(&sys, (step - 1) as f64 * dt, dt, &mut y, &mut work)?;
            let t = step as f64 * dt;
            let cn = y[n..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let drift = (cn - 1.0).abs();
            traj.max_norm_drift = traj.max_norm_drift.max(drift);
            if drift > settings.norm_tolerance {
                return Err(Error::NormDrift { time: t, drift, tolerance: settings.norm_tolerance });
            }
            let (site, fd) = frame_deviation(&y[..n], self.lay.sites, self.lay.nv, 1);
            max_frame_drift = max_frame_drift.max(fd);
            if fd > settings.norm_tolerance {
                return Err(Error::FrameNotOrthonormal { site, deviation: fd });
            }
            let st = self.unpack(&y);
            traj.min_fidelity = traj.min_fidelity.min(overlap_in(self.space.basis(), state0, &st)?.norm());
            if step % settings.observe_every == 0 || step == steps {
                observe(&mut traj, t, &y)?;
            }
            if settings.snapshot_every > 0 && (step % settings.snapshot_every == 0 || step == steps) {
                traj.snapshots.push((t, y.clone()));
            }
        }
        let final_state = self.unpack(&y);
        traj.final_state = final_state.amplitudes.clone();
        Ok(TdvTrajectory { trajectory: traj, final_state, max_frame_drift })
    }

    /// Final state of a bare single-mode propagation.
    pub fn propagate<C: Coupling>(
        &self,
        state0: &TdvState,
        coupling: &C,
        t_final: f64,
        dt: f64,
        offset: f64,
    ) -> Result<TdvState> {
        single_mode_check(self.lay.d)?;
        self.check(state0)?;
        let sys = TdvDynamics { model: self, coupling, offset };
        let (steps, dt) = step_count(t_final, dt);
        let mut y = pack(state0);
        let mut work = Rk4Work::new(y.len());
        for step in 0..steps {
            rk4_step(&sys, step as f64 * dt, dt, &mut y, &mut work)?;
        }
        Ok(self.unpack(&y))
    }

    /// Minimum of `|<state0|state(t)>|` sampled every `stride` steps and at
    /// the end.
    pub fn min_fidelity<C: Coupling>(&self, state0: &TdvState, coupling: &C, t_final: f64, dt: f64, stride: usize) -> Result<f64> {
        single_mode_check(self.lay.d)?;
        self.check(state0)?;
        let offset = self.energy(state0, coupling.g(0.0))?;
        let sys = TdvDynamics { model: self, coupling, offset };
        let (steps, dt) = step_count(t_final, dt);
        let stride = stride.max(1);
        let mut y = pack(state0);
        let mut work = Rk4Work::new(y.len());
        let mut min = 1.0f64;
        for step in 1..=steps {
            rk4_step(&sys, (step - 1) as f64 * dt, dt, &mut y, &mut work)?;
            if step % stride == 0 || step == steps {
                let st = self.unpack(&y);
                let drift = (st.norm() - 1.0).abs();
                if drift > crate::propagate::NORM_TOLERANCE {
                    return Err(Error::NormDrift {
                        time: step as f64 * dt,
                        drift,
                        tolerance: crate::propagate::NORM_TOLERANCE,
                    });
                }
                min = min.min(overlap_in(self.space.basis(), state0, &st)?.norm());
            }
        }
        Ok(min)
    }

    pub(crate) fn unpack(&self, y: &[Complex64]) -> TdvState {
        let n = self.lay.len();
        TdvState {
            sites: self.lay.sites,
            fixed_bands: self.lay.nv,
            modes: self.lay.d,
            particles: self.space.particles(),
            frames: y[..n].to_vec(),
            amplitudes: y[n..].to_vec(),
        }
    }
}

fn pack(state: &TdvState) -> Vec<Complex64> {
    let mut y = state.frames.clone();
    y.extend_from_slice(&state.amplitudes);
    y
}

struct TdvDynamics<'a, C: Coupling> {
    model: &'a TdvModel,
    coupling: &'a C,
    offset: f64,
}

impl<C: Coupling> Dynamics for TdvDynamics<'_, C> {
    fn len(&self) -> usize {
        self.model.lay.len() + self.model.space.dim()
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) -> Result<()> {
        self.model.rhs_into(self.coupling.g(t), self.offset, y, dy)
    }
}

/// Observables of a single-mode propagation plus its final state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TdvTrajectory {
    /// `final_state` holds the final amplitudes; snapshots hold frames
    /// followed by amplitudes.
    pub trajectory: Trajectory,
    pub final_state: TdvState,
    pub max_frame_drift: f64,
}

/// `<a|b>` of two single-mode states with equal occupations layout.
pub fn overlap(a: &TdvState, b: &TdvState) -> Result<Complex64> {
    if a.modes != 1 || b.modes != 1 {
        return Err(Error::invalid("modes", "closed-form overlap needs D = 1; embed instead"));
    }
    if a.sites != b.sites || a.fixed_bands != b.fixed_bands || a.particles != b.particles {
        return Err(Error::Mismatch("overlap of states with different shapes".into()));
    }
    overlap_in(&a.reduced_basis()?, a, b)
}

/// [`overlap`] over a prebuilt reduced basis.
pub(crate) fn overlap_in(basis: &FockBasis, a: &TdvState, b: &TdvState) -> Result<Complex64> {
    let nv = a.fixed_bands;
    let mode_overlap: Vec<Complex64> = (0..a.sites)
        .map(|k| (0..nv).map(|al| a.frames[k * nv + al].conj() * b.frames[k * nv + al]).sum())
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, occ) in basis.iter().enumerate() {
        let (ca, cb) = (a.amplitudes[i], b.amplitudes[i]);
        if ca == Complex64::new(0.0, 0.0) || cb == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut w = ca.conj() * cb;
        for (k, &n) in occ.iter().enumerate() {
            w *= mode_overlap[k].powu(n as u32);
        }
        acc += w;
    }
    Ok(acc)
}

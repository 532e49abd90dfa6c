//! Fixed-step fourth-order Runge-Kutta propagation with a time-dependent
//! coupling `g(t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::hamiltonian::MbhHamiltonian;
use crate::mbh::{band_populations, inner, norm, site_populations};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_SNAPSHOT_STRIDE: usize = 100;
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Interaction schedule `t -> g(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { g: f64 },
    /// `g_ini + (g_fin - g_ini) t / tau`, held at `g_fin` after `tau`.
    Linear { g_ini: f64, g_fin: f64, tau: f64 },
    /// `g0 + g_mod sin(omega t)`.
    Sinusoidal { g0: f64, g_mod: f64, omega: f64 },
}

impl Schedule {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant { g } => g,
            Schedule::Linear { g_ini, g_fin, tau } => {
                if t >= tau {
                    g_fin
                } else {
                    g_ini + (g_fin - g_ini) * t / tau
                }
            }
            Schedule::Sinusoidal { g0, g_mod, omega } => g0 + g_mod * (omega * t).sin(),
        }
    }

    /// The schedule run backwards from `t_final`.
    pub fn reversed(&self, t_final: f64) -> ReversedSchedule {
        ReversedSchedule { inner: *self, t_final }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReversedSchedule {
    inner: Schedule,
    t_final: f64,
}

pub trait Coupling: Sync {
    fn g(&self, t: f64) -> f64;
}

impl Coupling for Schedule {
    fn g(&self, t: f64) -> f64 {
        self.value(t)
    }
}

impl Coupling for ReversedSchedule {
    fn g(&self, t: f64) -> f64 {
        self.inner.value(self.t_final - t)
    }
}

/// Right-hand side `dy/dt = f(t, y)` of a complex ODE system.
pub trait Dynamics {
    fn len(&self) -> usize;
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) -> Result<()>;
}

/// Scratch buffers for [`rk4_step`].
pub struct Rk4Work {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Work {
    pub fn new(len: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); len];
        Rk4Work { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }
}

pub fn rk4_step<D: Dynamics + ?Sized>(
    sys: &D,
    t: f64,
    dt: f64,
    y: &mut [Complex64],
    w: &mut Rk4Work,
) -> Result<()> {
    let half = 0.5 * dt;
    sys.rhs(t, y, &mut w.k1)?;
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k1[i] * half;
    }
    sys.rhs(t + half, &w.tmp, &mut w.k2)?;
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k2[i] * half;
    }
    sys.rhs(t + half, &w.tmp, &mut w.k3)?;
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k3[i] * dt;
    }
    sys.rhs(t + dt, &w.tmp, &mut w.k4)?;
    let sixth = dt / 6.0;
    for i in 0..y.len() {
        y[i] += (w.k1[i] + (w.k2[i] + w.k3[i]) * 2.0 + w.k4[i]) * sixth;
    }
    Ok(())
}

/// Number of steps and the step actually used to land exactly on `t_final`.
pub fn step_count(t_final: f64, dt: f64) -> (usize, f64) {
    if t_final <= 0.0 {
        return (0, 0.0);
    }
    let n = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    (n, t_final / n as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveSettings {
    pub dt: f64,
    /// Observables are recorded every this many steps.
    pub observe_every: usize,
    /// Full states are stored every this many steps (0 disables).
    pub snapshot_every: usize,
    pub record_energy: bool,
    pub norm_tolerance: f64,
    /// Constant subtracted from `H`, changing only the global phase.
    /// `None` uses the initial energy.
    pub energy_offset: Option<f64>,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        EvolveSettings {
            dt: DEFAULT_DT,
            observe_every: 1,
            snapshot_every: DEFAULT_SNAPSHOT_STRIDE,
            record_energy: false,
            norm_tolerance: NORM_TOLERANCE,
            energy_offset: None,
        }
    }
}

impl EvolveSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.observe_every == 0 {
            return Err(Error::invalid("observe_every", "must be at least 1"));
        }
        Ok(())
    }
}

/// Time series recorded along a propagation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Named observables, each aligned with `times`.
    pub series: Vec<(String, Vec<f64>)>,
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
    pub final_state: Vec<Complex64>,
    /// Minimum of `|<psi(0)|psi(t)>|` over every integrator step.
    pub min_fidelity: f64,
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub(crate) fn push(&mut self, name: &str, value: f64) {
        match self.series.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => v.push(value),
            None => self.series.push((name.to_string(), vec![value])),
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.series.iter().map(|(n, _)| n.as_str()).collect()
    }
}

struct MbhDynamics<'a, C: Coupling> {
    h: &'a MbhHamiltonian,
    coupling: &'a C,
    offset: f64,
}

impl<C: Coupling> Dynamics for MbhDynamics<'_, C> {
    fn len(&self) -> usize {
        self.h.dim()
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) -> Result<()> {
        self.h.apply(self.coupling.g(t), self.offset, y, dy);
        let minus_i = Complex64::new(0.0, -1.0);
        dy.iter_mut().for_each(|v| *v *= minus_i);
        Ok(())
    }
}

/// Propagates `psi0` under `H(g(t))` from `t = 0` to `t_final`.
pub fn evolve<C: Coupling>(
    h: &MbhHamiltonian,
    basis: &FockBasis,
    coupling: &C,
    psi0: &[Complex64],
    t_final: f64,
    settings: &EvolveSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    if psi0.len() != h.dim() || basis.dim() != h.dim() {
        return Err(Error::Mismatch(format!(
            "state {} / basis {} / Hamiltonian {}",
            psi0.len(),
            basis.dim(),
            h.dim()
        )));
    }
    let offset = settings
        .energy_offset
        .unwrap_or_else(|| h.energy(coupling.g(0.0), psi0));
    let sys = MbhDynamics { h, coupling, offset };
    let (steps, dt) = step_count(t_final, settings.dt);

    let mut psi = psi0.to_vec();
    let mut work = Rk4Work::new(psi.len());
    let mut traj = Trajectory { min_fidelity: 1.0, ..Default::default() };
    let initial_norm = norm(psi0);

    let observe = |traj: &mut Trajectory, t: f64, psi: &[Complex64]| {
        traj.times.push(t);
        for (k, p) in site_populations(basis, psi).into_iter().enumerate() {
            traj.push(&format!("site_{}", k + 1), p);
        }
        for (a, p) in band_populations(basis, psi).into_iter().enumerate() {
            traj.push(&format!("band_{}", a + 1), p);
        }
        traj.push("fidelity", inner(psi0, psi).norm() / initial_norm.powi(2));
        traj.push("norm", norm(psi));
        if settings.record_energy {
            traj.push("energy", h.energy(coupling.g(t), psi));
        }
    };

    observe(&mut traj, 0.0, &psi);
    if settings.snapshot_every > 0 {
        traj.snapshots.push((0.0, psi.clone()));
    }
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * dt;
        rk4_step(&sys, t0, dt, &mut psi, &mut work)?;
        let t = step as f64 * dt;
        let nrm = norm(&psi);
        let drift = (nrm - initial_norm).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if drift > settings.norm_tolerance {
            return Err(Error::NormDrift { time: t, drift, tolerance: settings.norm_tolerance });
        }
        let f = inner(psi0, &psi).norm() / initial_norm.powi(2);
        traj.min_fidelity = traj.min_fidelity.min(f);
        if step % settings.observe_every == 0 || step == steps {
            observe(&mut traj, t, &psi);
        }
        if settings.snapshot_every > 0 && (step % settings.snapshot_every == 0 || step == steps) {
            traj.snapshots.push((t, psi.clone()));
        }
    }
    traj.final_state = psi;
    Ok(traj)
}

/// Final state of a bare propagation with no observables.
pub fn propagate<C: Coupling>(
    h: &MbhHamiltonian,
    coupling: &C,
    psi0: &[Complex64],
    t_final: f64,
    dt: f64,
    offset: f64,
) -> Result<Vec<Complex64>> {
    let sys = MbhDynamics { h, coupling, offset };
    let (steps, dt) = step_count(t_final, dt);
    let mut psi = psi0.to_vec();
    let mut work = Rk4Work::new(psi.len());
    for step in 0..steps {
        rk4_step(&sys, step as f64 * dt, dt, &mut psi, &mut work)?;
    }
    Ok(psi)
}

/// Minimum of `|<psi0|psi(t)>|` sampled every `stride` steps and at the end.
pub fn min_fidelity<C: Coupling>(
    h: &MbhHamiltonian,
    coupling: &C,
    psi0: &[Complex64],
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<f64> {
    let offset = h.energy(coupling.g(0.0), psi0);
    let sys = MbhDynamics { h, coupling, offset };
    let (steps, dt) = step_count(t_final, dt);
    let stride = stride.max(1);
    let mut psi = psi0.to_vec();
    let mut work = Rk4Work::new(psi.len());
    let n0 = norm(psi0);
    let mut min = 1.0f64;
    for step in 1..=steps {
        rk4_step(&sys, (step - 1) as f64 * dt, dt, &mut psi, &mut work)?;
        if step % stride == 0 || step == steps {
            let drift = (norm(&psi) - n0).abs();
            if drift > NORM_TOLERANCE {
                return Err(Error::NormDrift { time: step as f64 * dt, drift, tolerance: NORM_TOLERANCE });
            }
            min = min.min(inner(psi0, &psi).norm() / (n0 * n0));
        }
    }
    Ok(min)
}

/// `1 - |<psi_dt | psi_{dt/2}>|` at `t_final`: the step-halving convergence
/// measure.
pub fn halving_fidelity_change<C: Coupling>(
    h: &MbhHamiltonian,
    coupling: &C,
    psi0: &[Complex64],
    t_final: f64,
    dt: f64,
) -> Result<f64> {
    let offset = h.energy(coupling.g(0.0), psi0);
    let coarse = propagate(h, coupling, psi0, t_final, dt, offset)?;
    let fine = propagate(h, coupling, psi0, t_final, 0.5 * dt, offset)?;
    Ok(1.0 - inner(&coarse, &fine).norm() / (norm(&coarse) * norm(&fine)))
}

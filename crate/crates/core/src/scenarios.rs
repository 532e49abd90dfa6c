//! The four numerical experiments, each run for the multiband model and the
//! variational ansatz, producing figure-ready tables.
//!
//! Sweep points are independent and run in parallel; results come back in
//! input order, so output is deterministic for a given config.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{load_or_compute, BandData};
use crate::config::{ScenarioConfig, ScenarioKind};
use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::hamiltonian::MbhHamiltonian;
use crate::lattice::LatticeSpec;
use crate::mbh::{ground_state, norm};
use crate::output::{Cell, Table};
use crate::params::BhParams;
use crate::propagate::{evolve, min_fidelity, propagate, EvolveSettings, Schedule, NORM_TOLERANCE};
use crate::tdv::{widen_frames, MinimizeOptions, TdvModel, TdvState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mbh,
    Tdv,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mbh => "mbh",
            Method::Tdv => "tdv",
        }
    }
}

/// Band data for the largest band count any method of `cfg` needs.
pub fn band_data(cfg: &ScenarioConfig, cache: Option<&Path>) -> Result<BandData> {
    let bands = cfg.bands_mbh.iter().chain(&cfg.bands_tdv).copied().max().unwrap_or(1);
    let spec = LatticeSpec::with_cutoff(cfg.depth, cfg.wannier_sites, cfg.cutoff)?;
    Ok(load_or_compute(cache, &spec, bands, cfg.quadrature_points)?.0)
}

fn minimize_options(cfg: &ScenarioConfig) -> MinimizeOptions {
    MinimizeOptions { starts: cfg.starts, seed: cfg.seed, ..Default::default() }
}

/// Copies a single-band state into the lowest band of `basis`.
pub fn lift_single_band(single: &FockBasis, amplitudes: &[Complex64], basis: &FockBasis) -> Result<Vec<Complex64>> {
    if single.bands() != 1 || single.sites() != basis.sites() || single.particles() != basis.particles() {
        return Err(Error::Mismatch("lift needs a single-band basis of the same system".into()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); basis.dim()];
    let lowest = vec![0; basis.sites()];
    for (occ, &a) in single.iter().zip(amplitudes) {
        let per_site: Vec<usize> = occ.iter().map(|&n| n as usize).collect();
        out[basis.site_band_state(&per_site, &lowest)?] = a;
    }
    Ok(out)
}

fn mbh_hamiltonian(params: &BhParams, cfg: &ScenarioConfig, bands: usize) -> Result<(FockBasis, MbhHamiltonian)> {
    let basis = FockBasis::new(cfg.sites, bands, cfg.particles)?;
    let h = MbhHamiltonian::new(&params.truncate(bands)?, &basis, cfg.periodic)?;
    Ok((basis, h))
}

fn tdv_model(params: &BhParams, cfg: &ScenarioConfig, bands: usize, modes: usize) -> Result<TdvModel> {
    TdvModel::new(&params.truncate(bands)?, cfg.sites, cfg.particles, modes, cfg.periodic)
}

fn zero_based(bands: &[usize]) -> Vec<usize> {
    bands.iter().map(|&b| b - 1).collect()
}

// ---------------------------------------------------------------------------
// ground-state sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsRow {
    pub g: f64,
    pub method: Method,
    /// `N_M` or `N_V`.
    pub bands: usize,
    /// Variational modes per site; 0 for the multiband model.
    pub modes: usize,
    pub energy: f64,
    /// `energy` minus the single-band ground energy at the same `g`.
    pub relative: f64,
    pub converged: bool,
    /// Winning start of the variational minimization.
    pub best_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsSweep {
    pub g: Vec<f64>,
    pub baseline: Vec<f64>,
    pub rows: Vec<GsRow>,
}

impl GsSweep {
    pub fn energy(&self, g: f64, method: Method, bands: usize, modes: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.g == g && r.method == method && r.bands == bands && r.modes == modes)
            .map(|r| r.energy)
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("gs_sweep", &["g", "method", "bands", "modes", "energy", "relative_energy"]);
        t.comments.push("ground-state energies in E_R; relative_energy = energy - E_BH(g)".into());
        for r in &self.rows {
            t.push(vec![r.g.into(), r.method.name().into(), r.bands.into(), r.modes.into(), r.energy.into(), r.relative.into()]);
        }
        vec![t]
    }
}

/// Ground-state energies over the `g` grid: the multiband model for each
/// `N_M`, the ansatz for each `N_V` and `D`, relative to the single-band
/// model.
pub fn gs_sweep(cfg: &ScenarioConfig, params: &BhParams) -> Result<GsSweep> {
    let (b1, h1) = mbh_hamiltonian(params, cfg, 1)?;
    drop(b1);
    let baseline = cfg
        .g
        .par_iter()
        .map(|&g| Ok(ground_state(&h1.at(g)?)?.0))
        .collect::<Result<Vec<f64>>>()?;
    let rel = |i: usize, e: f64| e - baseline[i];

    let mut rows = Vec::new();
    for &nm in &cfg.bands_mbh {
        let energies = if nm == 1 {
            baseline.clone()
        } else {
            let (_, h) = mbh_hamiltonian(params, cfg, nm)?;
            cfg.g.par_iter().map(|&g| Ok(ground_state(&h.at(g)?)?.0)).collect::<Result<Vec<f64>>>()?
        };
        for (i, (&g, e)) in cfg.g.iter().zip(energies).enumerate() {
            rows.push(GsRow { g, method: Method::Mbh, bands: nm, modes: 0, energy: e, relative: rel(i, e), converged: true, best_start: None });
        }
    }

    let opts = minimize_options(cfg);
    let mut modes = cfg.variational_bands.clone();
    modes.sort_unstable();
    modes.dedup();
    for &nv in &cfg.bands_tdv {
        // single-mode optima seed the two-mode runs
        let mut single: Vec<Option<TdvState>> = vec![None; cfg.g.len()];
        for &d in &modes {
            if d > nv {
                continue;
            }
            let model = tdv_model(params, cfg, nv, d)?;
            let results = cfg
                .g
                .par_iter()
                .zip(&single)
                .map(|(&g, seed_state)| {
                    let mut o = opts.clone();
                    if let (Some(s), true) = (seed_state, d > 1) {
                        o.initial_frames = Some(widen_frames(s, d)?);
                    }
                    model.ground_state(g, &o)
                })
                .collect::<Result<Vec<_>>>()?;
            for (i, (&g, gs)) in cfg.g.iter().zip(&results).enumerate() {
                rows.push(GsRow {
                    g,
                    method: Method::Tdv,
                    bands: nv,
                    modes: d,
                    energy: gs.energy,
                    relative: rel(i, gs.energy),
                    converged: gs.converged,
                    best_start: Some(gs.best_start),
                });
            }
            if d == 1 {
                single = results.into_iter().map(|gs| Some(gs.state)).collect();
            }
        }
    }
    Ok(GsSweep { g: cfg.g.clone(), baseline, rows })
}

// ---------------------------------------------------------------------------
// Fock-state evolution

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSeries {
    pub method: Method,
    pub bands: usize,
    /// `populations[k][i]`: site `k` at `times[i]`.
    pub populations: Vec<Vec<f64>>,
    pub max_norm_drift: f64,
    /// Largest `|E(t) - E(0)| / max(|E(0)|, 1)` over the recorded times.
    pub max_energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockEvolution {
    pub g: f64,
    pub times: Vec<f64>,
    pub series: Vec<PopulationSeries>,
}

impl FockEvolution {
    pub fn find(&self, method: Method, bands: usize) -> Option<&PopulationSeries> {
        self.series.iter().find(|s| s.method == method && s.bands == bands)
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut cols = vec!["t".to_string()];
        for s in &self.series {
            for k in 0..s.populations.len() {
                cols.push(format!("{}{}_site{}", s.method.name(), s.bands, k + 1));
            }
        }
        let refs: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
        let mut t = Table::new("populations", &refs);
        t.comments.push(format!("site populations at constant g = {:?}", self.g));
        for (i, &time) in self.times.iter().enumerate() {
            let mut row: Vec<Cell> = vec![time.into()];
            for s in &self.series {
                row.extend(s.populations.iter().map(|p| Cell::from(p[i])));
            }
            t.push(row);
        }
        vec![t]
    }
}

fn populations_from(traj: &crate::propagate::Trajectory, sites: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    let pops = (1..=sites)
        .map(|k| {
            traj.series(&format!("site_{k}"))
                .map(|s| s.to_vec())
                .ok_or_else(|| Error::Mismatch(format!("missing site_{k} series")))
        })
        .collect::<Result<Vec<_>>>()?;
    let e = traj.series("energy").unwrap_or(&[]);
    let e0 = e.first().copied().unwrap_or(0.0);
    let drift = e.iter().map(|x| (x - e0).abs() / e0.abs().max(1.0)).fold(0.0, f64::max);
    Ok((pops, drift))
}

/// Site populations from a Fock initial state at constant `g = cfg.g[0]`.
pub fn fock_evolution(cfg: &ScenarioConfig, params: &BhParams) -> Result<FockEvolution> {
    let g = cfg.g[0];
    let coupling = Schedule::Constant { g };
    let settings = EvolveSettings {
        dt: cfg.dt,
        observe_every: cfg.output_stride,
        snapshot_every: 0,
        record_energy: true,
        ..Default::default()
    };
    let bands0 = zero_based(&cfg.initial_bands);
    let mut jobs: Vec<(Method, usize)> = cfg.bands_mbh.iter().map(|&b| (Method::Mbh, b)).collect();
    jobs.extend(cfg.bands_tdv.iter().map(|&b| (Method::Tdv, b)));
    let results = jobs
        .par_iter()
        .map(|&(method, bands)| -> Result<(Vec<f64>, PopulationSeries)> {
            let (traj, frame_drift) = match method {
                Method::Mbh => {
                    let (basis, h) = mbh_hamiltonian(params, cfg, bands)?;
                    let mut psi = vec![Complex64::new(0.0, 0.0); basis.dim()];
                    psi[basis.site_band_state(&cfg.occupations, &bands0)?] = Complex64::new(1.0, 0.0);
                    (evolve(&h, &basis, &coupling, &psi, cfg.t_final, &settings)?, 0.0)
                }
                Method::Tdv => {
                    let model = tdv_model(params, cfg, bands, 1)?;
                    let s0 = TdvState::fock(bands, &cfg.occupations, &bands0)?;
                    let r = model.evolve(&s0, &coupling, cfg.t_final, &settings)?;
                    (r.trajectory, r.max_frame_drift)
                }
            };
            let (populations, max_energy_drift) = populations_from(&traj, cfg.sites)?;
            Ok((
                traj.times.clone(),
                PopulationSeries {
                    method,
                    bands,
                    populations,
                    max_norm_drift: traj.max_norm_drift.max(frame_drift),
                    max_energy_drift,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let times = results.first().map(|r| r.0.clone()).unwrap_or_default();
    Ok(FockEvolution { g, times, series: results.into_iter().map(|r| r.1).collect() })
}

// ---------------------------------------------------------------------------
// linear quench

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchRow {
    /// Ramp duration; 0 marks the sudden limit `<psi0|H(g_fin)|psi0>`.
    pub tau: f64,
    pub method: Method,
    pub bands: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchReference {
    pub method: Method,
    pub bands: usize,
    /// Ground-state energy at `g_fin`.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearQuench {
    pub g_ini: f64,
    pub g_fin: f64,
    pub rows: Vec<QuenchRow>,
    pub references: Vec<QuenchReference>,
}

impl LinearQuench {
    pub fn energy(&self, tau: f64, method: Method, bands: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.tau == tau && r.method == method && r.bands == bands)
            .map(|r| r.energy)
    }

    pub fn reference(&self, method: Method, bands: usize) -> Option<f64> {
        self.references.iter().find(|r| r.method == method && r.bands == bands).map(|r| r.energy)
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("quench", &["tau", "method", "bands", "energy"]);
        t.comments.push(format!(
            "<H(g_fin)> after a linear ramp g_ini = {:?} -> g_fin = {:?}; tau = 0 is the sudden limit",
            self.g_ini, self.g_fin
        ));
        for r in &self.rows {
            t.push(vec![r.tau.into(), r.method.name().into(), r.bands.into(), r.energy.into()]);
        }
        let mut refs = Table::new("quench_reference", &["method", "bands", "ground_energy"]);
        refs.comments.push(format!("ground-state energies at g_fin = {:?}", self.g_fin));
        for r in &self.references {
            refs.push(vec![r.method.name().into(), r.bands.into(), r.energy.into()]);
        }
        vec![t, refs]
    }
}

/// Single-band ground state at `g_ini`, ramped linearly to `g_fin` over each
/// `tau`; reports `<H(g_fin)>` at `t = tau`.
pub fn linear_quench(cfg: &ScenarioConfig, params: &BhParams) -> Result<LinearQuench> {
    let (b1, h1) = mbh_hamiltonian(params, cfg, 1)?;
    let (_, gs1) = ground_state(&h1.at(cfg.g_ini)?)?;
    let psi1 = gs1.amplitudes;
    let opts = minimize_options(cfg);
    let mut rows = Vec::new();
    let mut references = Vec::new();

    for &nm in &cfg.bands_mbh {
        let (basis, h) = mbh_hamiltonian(params, cfg, nm)?;
        let psi0 = lift_single_band(&b1, &psi1, &basis)?;
        let offset = h.energy(cfg.g_ini, &psi0);
        rows.push(QuenchRow { tau: 0.0, method: Method::Mbh, bands: nm, energy: h.energy(cfg.g_fin, &psi0) });
        let finals = cfg
            .tau
            .par_iter()
            .map(|&tau| {
                let ramp = Schedule::Linear { g_ini: cfg.g_ini, g_fin: cfg.g_fin, tau };
                let psi = propagate(&h, &ramp, &psi0, tau, cfg.dt, offset)?;
                let drift = (norm(&psi) - 1.0).abs();
                if drift > NORM_TOLERANCE {
                    return Err(Error::NormDrift { time: tau, drift, tolerance: NORM_TOLERANCE });
                }
                Ok(h.energy(cfg.g_fin, &psi) / norm(&psi).powi(2))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.extend(cfg.tau.iter().zip(finals).map(|(&tau, energy)| QuenchRow { tau, method: Method::Mbh, bands: nm, energy }));
        references.push(QuenchReference { method: Method::Mbh, bands: nm, energy: ground_state(&h.at(cfg.g_fin)?)?.0 });
    }

    for &nv in &cfg.bands_tdv {
        let model = tdv_model(params, cfg, nv, 1)?;
        let s0 = TdvState::new(
            cfg.sites,
            nv,
            1,
            cfg.particles,
            TdvState::aligned_frames(cfg.sites, nv, 1),
            psi1.clone(),
        )?;
        let offset = model.energy(&s0, cfg.g_ini)?;
        rows.push(QuenchRow { tau: 0.0, method: Method::Tdv, bands: nv, energy: model.energy(&s0, cfg.g_fin)? });
        let finals = cfg
            .tau
            .par_iter()
            .map(|&tau| {
                let ramp = Schedule::Linear { g_ini: cfg.g_ini, g_fin: cfg.g_fin, tau };
                let s = model.propagate(&s0, &ramp, tau, cfg.dt, offset)?;
                let drift = (s.norm() - 1.0).abs();
                if drift > NORM_TOLERANCE {
                    return Err(Error::NormDrift { time: tau, drift, tolerance: NORM_TOLERANCE });
                }
                model.energy(&s, cfg.g_fin)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.extend(cfg.tau.iter().zip(finals).map(|(&tau, energy)| QuenchRow { tau, method: Method::Tdv, bands: nv, energy }));
        references.push(QuenchReference { method: Method::Tdv, bands: nv, energy: model.ground_state(cfg.g_fin, &opts)?.energy });
    }
    Ok(LinearQuench { g_ini: cfg.g_ini, g_fin: cfg.g_fin, rows, references })
}

// ---------------------------------------------------------------------------
// modulation spectroscopy

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub omega: f64,
    pub transfer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationCurve {
    pub method: Method,
    pub bands: usize,
    /// `D(omega)` on the coarse grid.
    pub transfer: Vec<f64>,
    /// Interior local maxima of the coarse curve, each refined on a grid
    /// ten times finer within one coarse step; strongest first.
    pub peaks: Vec<Peak>,
}

impl ModulationCurve {
    /// Largest `D` on the coarse grid within `window` of `omega`.
    pub fn max_near(&self, omegas: &[f64], omega: f64, window: f64) -> f64 {
        omegas
            .iter()
            .zip(&self.transfer)
            .filter(|(w, _)| (*w - omega).abs() <= window + 1e-12)
            .map(|(_, d)| *d)
            .fold(0.0, f64::max)
    }

    /// Refined peak closest to `omega`.
    pub fn peak_near(&self, omega: f64) -> Option<Peak> {
        self.peaks.iter().copied().min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationSweep {
    pub omegas: Vec<f64>,
    pub curves: Vec<ModulationCurve>,
    /// `|<initial|ground>|` for the multiband model with the most bands, at `g0`.
    pub initial_overlap: f64,
}

impl ModulationSweep {
    pub fn curve(&self, method: Method, bands: usize) -> Option<&ModulationCurve> {
        self.curves.iter().find(|c| c.method == method && c.bands == bands)
    }

    pub fn tables(&self) -> Vec<Table> {
        // the largest band count of each method gets the plain column name
        let lead = |m: Method| self.curves.iter().filter(|c| c.method == m).map(|c| c.bands).max();
        let mut order: Vec<(String, &ModulationCurve)> = Vec::new();
        for m in [Method::Mbh, Method::Tdv] {
            if let Some(b) = lead(m) {
                order.push((format!("D_{}", m.name()), self.curve(m, b).expect("lead curve")));
            }
        }
        for c in &self.curves {
            if Some(c.bands) != lead(c.method) {
                let tag = if c.method == Method::Mbh { "nm" } else { "nv" };
                order.push((format!("D_{}_{}{}", c.method.name(), tag, c.bands), c));
            }
        }
        let mut cols = vec!["omega".to_string()];
        cols.extend(order.iter().map(|(n, _)| n.clone()));
        let refs: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
        let mut t = Table::new("modulation", &refs);
        t.comments.push("transfer efficiency D(omega) = 1 - min_t |<psi(0)|psi(t)>|".into());
        t.comments.push(
            order
                .iter()
                .map(|(n, c)| format!("{n}: {} with {} bands", c.method.name(), c.bands))
                .collect::<Vec<_>>()
                .join("; "),
        );
        for (i, &w) in self.omegas.iter().enumerate() {
            let mut row: Vec<Cell> = vec![w.into()];
            row.extend(order.iter().map(|(_, c)| Cell::from(c.transfer[i])));
            t.push(row);
        }
        let mut p = Table::new("modulation_peaks", &["method", "bands", "omega", "transfer"]);
        p.comments.push(format!("refined local maxima; initial-state ground overlap = {:?}", self.initial_overlap));
        for c in &self.curves {
            for pk in &c.peaks {
                p.push(vec![c.method.name().into(), c.bands.into(), pk.omega.into(), pk.transfer.into()]);
            }
        }
        vec![t, p]
    }
}

/// Interior local maxima of `values` over `grid`.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect()
}

/// Transfer efficiency under `g(t) = g0 + g_mod sin(omega t)` from the
/// band-1 Fock state, swept over the omega grid.
pub fn modulation_sweep(cfg: &ScenarioConfig, params: &BhParams) -> Result<ModulationSweep> {
    let omegas = cfg.omega_grid();
    let bands0 = zero_based(&cfg.initial_bands);
    let step = cfg.omega_step;

    enum Model {
        Mbh(MbhHamiltonian, Vec<Complex64>),
        Tdv(TdvModel, TdvState),
    }
    let mut models = Vec::new();
    for &nm in &cfg.bands_mbh {
        let (basis, h) = mbh_hamiltonian(params, cfg, nm)?;
        let mut psi = vec![Complex64::new(0.0, 0.0); basis.dim()];
        psi[basis.site_band_state(&cfg.occupations, &bands0)?] = Complex64::new(1.0, 0.0);
        models.push((Method::Mbh, nm, Model::Mbh(h, psi)));
    }
    for &nv in &cfg.bands_tdv {
        let model = tdv_model(params, cfg, nv, 1)?;
        let s0 = TdvState::fock(nv, &cfg.occupations, &bands0)?;
        models.push((Method::Tdv, nv, Model::Tdv(model, s0)));
    }
    let transfer = |m: &Model, omega: f64| -> Result<f64> {
        let drive = Schedule::Sinusoidal { g0: cfg.g0, g_mod: cfg.g_mod, omega };
        let f = match m {
            Model::Mbh(h, psi) => min_fidelity(h, &drive, psi, cfg.t_final, cfg.dt, cfg.output_stride)?,
            Model::Tdv(model, s0) => model.min_fidelity(s0, &drive, cfg.t_final, cfg.dt, cfg.output_stride)?,
        };
        Ok((1.0 - f).clamp(0.0, 1.0))
    };

    let jobs: Vec<(usize, f64)> =
        (0..models.len()).flat_map(|m| omegas.iter().map(move |&w| (m, w))).collect();
    let flat = jobs.par_iter().map(|&(m, w)| transfer(&models[m].2, w)).collect::<Result<Vec<f64>>>()?;

    let mut curves = Vec::new();
    for (m, (method, bands, model)) in models.iter().enumerate() {
        let curve = flat[m * omegas.len()..(m + 1) * omegas.len()].to_vec();
        let fine: Vec<Vec<f64>> = local_maxima(&curve)
            .into_iter()
            .map(|i| (-9..=9).map(|j| omegas[i] + j as f64 * step / 10.0).collect())
            .collect();
        let peaks = fine
            .par_iter()
            .map(|grid| {
                let vals = grid.iter().map(|&w| transfer(model, w)).collect::<Result<Vec<f64>>>()?;
                let (k, &v) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
                Ok(Peak { omega: grid[k], transfer: v })
            })
            .collect::<Result<Vec<Peak>>>()?;
        let mut peaks = peaks;
        peaks.sort_by(|a, b| b.transfer.total_cmp(&a.transfer));
        curves.push(ModulationCurve { method: *method, bands: *bands, transfer: curve, peaks });
    }

    let initial_overlap = match models.iter().filter(|m| m.0 == Method::Mbh).max_by_key(|m| m.1) {
        Some((_, _, Model::Mbh(h, psi))) => {
            let (_, gs) = ground_state(&h.at(cfg.g0)?)?;
            crate::mbh::inner(&gs.amplitudes, psi).norm()
        }
        _ => f64::NAN,
    };
    Ok(ModulationSweep { omegas, curves, initial_overlap })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ScenarioResult {
    GsSweep(GsSweep),
    FockEvolution(FockEvolution),
    LinearQuench(LinearQuench),
    ModulationSweep(ModulationSweep),
}

impl ScenarioResult {
    pub fn tables(&self) -> Vec<Table> {
        match self {
            ScenarioResult::GsSweep(r) => r.tables(),
            ScenarioResult::FockEvolution(r) => r.tables(),
            ScenarioResult::LinearQuench(r) => r.tables(),
            ScenarioResult::ModulationSweep(r) => r.tables(),
        }
    }
}

/// Runs the scenario named in `cfg` with parameters from `params` (per unit
/// coupling, at least as many bands as any method needs).
pub fn run(cfg: &ScenarioConfig, params: &BhParams) -> Result<ScenarioResult> {
    cfg.validate()?;
    Ok(match cfg.scenario {
        ScenarioKind::GsSweep => ScenarioResult::GsSweep(gs_sweep(cfg, params)?),
        ScenarioKind::FockEvolution => ScenarioResult::FockEvolution(fock_evolution(cfg, params)?),
        ScenarioKind::LinearQuench => ScenarioResult::LinearQuench(linear_quench(cfg, params)?),
        ScenarioKind::ModulationSweep => ScenarioResult::ModulationSweep(modulation_sweep(cfg, params)?),
    })
}

//! Python bindings. Bands and sites are 0-based, energies in `E_R`, times
//! in `hbar / E_R`, the coupling `g` in `E_R / k`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyTuple;

use vbh::cache::BandData;
use vbh::config::{ScenarioConfig, ScenarioKind};
use vbh::params::DEFAULT_POINTS_PER_SITE;
use vbh::propagate::Schedule;
use vbh::tdv::MinimizeOptions;
use vbh::{mbh, scenarios, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. }
        | Error::CutoffTooSmall { .. }
        | Error::DimensionLimit { .. }
        | Error::Mismatch(_)
        | Error::Config { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A float is a constant coupling; otherwise `("linear", g_ini, g_fin, tau)`
/// or `("sinusoidal", g0, g_mod, omega)`.
fn schedule(obj: &Bound<'_, PyAny>) -> PyResult<Schedule> {
    if let Ok(g) = obj.extract::<f64>() {
        return Ok(Schedule::Constant { g });
    }
    let t = obj.cast::<PyTuple>()?;
    let kind: String = t.get_item(0)?.extract()?;
    let x = |i: usize| -> PyResult<f64> { t.get_item(i)?.extract() };
    match (kind.as_str(), t.len()) {
        ("linear", 4) => Ok(Schedule::Linear { g_ini: x(1)?, g_fin: x(2)?, tau: x(3)? }),
        ("sinusoidal", 4) => Ok(Schedule::Sinusoidal { g0: x(1)?, g_mod: x(2)?, omega: x(3)? }),
        _ => Err(PyValueError::new_err("schedule must be a float, ('linear', g_ini, g_fin, tau) or ('sinusoidal', g0, g_mod, omega)")),
    }
}

/// Single-particle and interaction parameters of the lowest bands.
#[pyclass(name = "BandParams", module = "vbh", from_py_object)]
#[derive(Clone)]
struct PyBandParams {
    inner: vbh::BhParams,
    bloch_energies: Vec<Vec<f64>>,
}

#[pymethods]
impl PyBandParams {
    #[new]
    #[pyo3(signature = (depth, sites, bands, g = 0.0, cutoff = 16))]
    fn new(depth: f64, sites: usize, bands: usize, g: f64, cutoff: usize) -> PyResult<Self> {
        let spec = vbh::LatticeSpec::with_cutoff(depth, sites, cutoff).map_err(py_err)?;
        let data = BandData::compute(&spec, bands, DEFAULT_POINTS_PER_SITE).map_err(py_err)?;
        let bloch_energies = data.spectrum.energies[..bands].to_vec();
        Ok(PyBandParams { inner: data.params.with_g(g), bloch_energies })
    }

    #[getter]
    fn bands(&self) -> usize {
        self.inner.bands
    }

    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }

    #[getter]
    fn tunneling(&self) -> Vec<f64> {
        self.inner.tunneling.clone()
    }

    #[getter]
    fn onsite(&self) -> Vec<f64> {
        self.inner.onsite.clone()
    }

    /// Bloch energies per band over the ring's quasimomenta.
    #[getter]
    fn bloch_energies(&self) -> Vec<Vec<f64>> {
        self.bloch_energies.clone()
    }

    /// Interaction integral per unit `g`.
    fn interaction(&self, a: usize, b: usize, c: usize, d: usize) -> PyResult<f64> {
        self.check(&[a, b, c, d])?;
        Ok(self.inner.interaction.get(a, b, c, d))
    }

    /// `g` times the interaction integral.
    fn u(&self, a: usize, b: usize, c: usize, d: usize) -> PyResult<f64> {
        self.check(&[a, b, c, d])?;
        Ok(self.inner.u(a, b, c, d))
    }

    fn with_g(&self, g: f64) -> Self {
        PyBandParams { inner: self.inner.with_g(g), bloch_energies: self.bloch_energies.clone() }
    }

    fn truncate(&self, bands: usize) -> PyResult<Self> {
        Ok(PyBandParams {
            inner: self.inner.truncate(bands).map_err(py_err)?,
            bloch_energies: self.bloch_energies[..bands].to_vec(),
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("BandParams(bands={}, g={})", self.inner.bands, self.inner.g)
    }
}

impl PyBandParams {
    fn check(&self, idx: &[usize]) -> PyResult<()> {
        match idx.iter().find(|&&i| i >= self.inner.bands) {
            Some(i) => Err(PyValueError::new_err(format!("band {i} out of range (bands = {})", self.inner.bands))),
            None => Ok(()),
        }
    }
}

/// Exact multiband Bose-Hubbard model on a ring or chain.
#[pyclass(name = "MbhSystem", module = "vbh")]
struct PyMbhSystem {
    basis: vbh::FockBasis,
    h: vbh::MbhHamiltonian,
}

#[pymethods]
impl PyMbhSystem {
    #[new]
    #[pyo3(signature = (params, sites, particles, periodic = true))]
    fn new(params: &PyBandParams, sites: usize, particles: usize, periodic: bool) -> PyResult<Self> {
        let basis = vbh::FockBasis::new(sites, params.inner.bands, particles).map_err(py_err)?;
        let h = vbh::MbhHamiltonian::new(&params.inner, &basis, periodic).map_err(py_err)?;
        Ok(PyMbhSystem { basis, h })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `(energy, amplitudes)` of the lowest state at coupling `g`.
    fn ground_state(&self, g: f64) -> PyResult<(f64, Vec<Complex64>)> {
        let (e, psi) = mbh::ground_state(&self.h.at(g).map_err(py_err)?).map_err(py_err)?;
        Ok((e, psi.amplitudes))
    }

    /// Basis vector with `occupations[k]` bosons on site `k`, all in band `bands[k]`.
    fn fock_state(&self, occupations: Vec<usize>, bands: Vec<usize>) -> PyResult<Vec<Complex64>> {
        let i = self.basis.site_band_state(&occupations, &bands).map_err(py_err)?;
        Ok(mbh::MbhState::basis_state(self.basis.dim(), i).amplitudes)
    }

    fn energy(&self, psi: Vec<Complex64>, g: f64) -> PyResult<f64> {
        self.check(&psi)?;
        Ok(self.h.energy(g, &psi))
    }

    /// RK4 propagation to `t_final` under `schedule` (see module docs).
    #[pyo3(signature = (psi, schedule, t_final, dt = 1e-3))]
    fn evolve(&self, py: Python<'_>, psi: Vec<Complex64>, schedule: &Bound<'_, PyAny>, t_final: f64, dt: f64) -> PyResult<Vec<Complex64>> {
        self.check(&psi)?;
        let s = crate::schedule(schedule)?;
        let offset = self.h.energy(s.value(0.0), &psi);
        py.detach(|| vbh::propagate::propagate(&self.h, &s, &psi, t_final, dt, offset)).map_err(py_err)
    }

    fn site_populations(&self, psi: Vec<Complex64>) -> PyResult<Vec<f64>> {
        self.check(&psi)?;
        Ok(mbh::site_populations(&self.basis, &psi))
    }

    fn band_populations(&self, psi: Vec<Complex64>) -> PyResult<Vec<f64>> {
        self.check(&psi)?;
        Ok(mbh::band_populations(&self.basis, &psi))
    }

    /// A variational state expressed in this system's Fock basis.
    fn embed(&self, state: &PyTdvState) -> PyResult<Vec<Complex64>> {
        Ok(vbh::embed_to_mbh(&state.inner, &self.basis).map_err(py_err)?.amplitudes)
    }
}

impl PyMbhSystem {
    fn check(&self, psi: &[Complex64]) -> PyResult<()> {
        if psi.len() != self.basis.dim() {
            return Err(PyValueError::new_err(format!("state has {} amplitudes, basis has {}", psi.len(), self.basis.dim())));
        }
        Ok(())
    }
}

/// Variational state: mode frames per site plus reduced Fock amplitudes.
#[pyclass(name = "TdvState", module = "vbh", from_py_object)]
#[derive(Clone)]
struct PyTdvState {
    inner: vbh::TdvState,
}

#[pymethods]
impl PyTdvState {
    /// Single-mode product state, `occupations[k]` bosons on site `k` in band `bands[k]`.
    #[staticmethod]
    fn fock(fixed_bands: usize, occupations: Vec<usize>, bands: Vec<usize>) -> PyResult<Self> {
        Ok(PyTdvState { inner: vbh::TdvState::fock(fixed_bands, &occupations, &bands).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyTdvState { inner: vbh::TdvState::from_json(text).map_err(py_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn sites(&self) -> usize {
        self.inner.sites
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes
    }

    #[getter]
    fn fixed_bands(&self) -> usize {
        self.inner.fixed_bands
    }

    #[getter]
    fn particles(&self) -> usize {
        self.inner.particles
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes.clone()
    }

    /// Weight of fixed band `band` in variational mode `mode` at `site`.
    fn d(&self, site: usize, band: usize, mode: usize) -> PyResult<Complex64> {
        if site >= self.inner.sites || band >= self.inner.fixed_bands || mode >= self.inner.modes {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.d(site, band, mode))
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn overlap(&self, other: &PyTdvState) -> PyResult<Complex64> {
        vbh::tdv::overlap(&self.inner, &other.inner).map_err(py_err)
    }
}

#[pyclass(name = "TdvModel", module = "vbh")]
struct PyTdvModel {
    inner: vbh::TdvModel,
}

#[pymethods]
impl PyTdvModel {
    #[new]
    #[pyo3(signature = (params, sites, particles, modes = 1, periodic = true))]
    fn new(params: &PyBandParams, sites: usize, particles: usize, modes: usize, periodic: bool) -> PyResult<Self> {
        Ok(PyTdvModel { inner: vbh::TdvModel::new(&params.inner, sites, particles, modes, periodic).map_err(py_err)? })
    }

    fn energy(&self, state: &PyTdvState, g: f64) -> PyResult<f64> {
        self.inner.energy(&state.inner, g).map_err(py_err)
    }

    /// `(energy, state, converged)` from a seeded multistart minimization.
    #[pyo3(signature = (g, starts = 16, seed = 0))]
    fn ground_state(&self, py: Python<'_>, g: f64, starts: usize, seed: u64) -> PyResult<(f64, PyTdvState, bool)> {
        let opts = MinimizeOptions { starts, seed, ..Default::default() };
        let gs = py.detach(|| self.inner.ground_state(g, &opts)).map_err(py_err)?;
        Ok((gs.energy, PyTdvState { inner: gs.state }, gs.converged))
    }

    /// Single-mode propagation to `t_final` under `schedule`.
    #[pyo3(signature = (state, schedule, t_final, dt = 1e-3))]
    fn evolve(&self, py: Python<'_>, state: &PyTdvState, schedule: &Bound<'_, PyAny>, t_final: f64, dt: f64) -> PyResult<PyTdvState> {
        let s = crate::schedule(schedule)?;
        let offset = self.inner.energy(&state.inner, s.value(0.0)).map_err(py_err)?;
        let out = py.detach(|| self.inner.propagate(&state.inner, &s, t_final, dt, offset)).map_err(py_err)?;
        Ok(PyTdvState { inner: out })
    }

    /// Mean occupation of every site.
    fn site_populations(&self, state: &PyTdvState) -> PyResult<Vec<f64>> {
        let rho = self.inner.densities(&state.inner).map_err(py_err)?;
        Ok((0..rho.sites).map(|k| rho.rho1[k * rho.sites + k].re).collect())
    }
}

/// Default config text for a scenario kind.
#[pyfunction]
fn default_config(scenario: &str) -> PyResult<String> {
    let kind = ScenarioKind::parse(scenario).ok_or_else(|| PyValueError::new_err(format!("unknown scenario `{scenario}`")))?;
    Ok(ScenarioConfig::defaults(kind).to_text())
}

/// Runs the scenario described by `config` (config file text). Returns the
/// result as JSON and a dict of CSV tables by name.
#[pyfunction]
fn run_scenario(py: Python<'_>, config: &str) -> PyResult<(String, Vec<(String, String)>)> {
    let cfg = ScenarioConfig::parse(config, "<python>", None).map_err(py_err)?;
    let result = py
        .detach(|| -> vbh::Result<_> {
            let data = scenarios::band_data(&cfg, None)?;
            scenarios::run(&cfg, &data.params)
        })
        .map_err(py_err)?;
    let json = serde_json::to_string(&result).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let tables = result.tables().into_iter().map(|t| (t.name.clone(), t.to_csv())).collect();
    Ok((json, tables))
}

#[pymodule(name = "vbh")]
fn vbh_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", vbh::output::VERSION)?;
    m.add_class::<PyBandParams>()?;
    m.add_class::<PyMbhSystem>()?;
    m.add_class::<PyTdvState>()?;
    m.add_class::<PyTdvModel>()?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}

//! Flat, typed key-value run configuration.
//!
//! ```text
//! # comment
//! [lattice]
//! depth = 10
//! sites = 4
//! [interaction]
//! g = 0.2, 1, 2, 4
//! ```
//!
//! Every key has a default that depends on the scenario; unknown keys and
//! malformed values are errors carrying the line and key.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::DEFAULT_CUTOFF;
use crate::params::DEFAULT_POINTS_PER_SITE;
use crate::propagate::DEFAULT_DT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    GsSweep,
    FockEvolution,
    LinearQuench,
    ModulationSweep,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::GsSweep => "gs_sweep",
            ScenarioKind::FockEvolution => "fock_evolution",
            ScenarioKind::LinearQuench => "linear_quench",
            ScenarioKind::ModulationSweep => "modulation_sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::GsSweep, Self::FockEvolution, Self::LinearQuench, Self::ModulationSweep]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    // [lattice]
    pub depth: f64,
    pub sites: usize,
    pub periodic: bool,
    pub cutoff: usize,
    pub quadrature_points: usize,
    /// Ring size the Wannier functions are built on.
    pub wannier_sites: usize,
    // [system]
    pub particles: usize,
    pub bands_mbh: Vec<usize>,
    pub bands_tdv: Vec<usize>,
    pub variational_bands: Vec<usize>,
    // [interaction]
    pub g: Vec<f64>,
    pub g_ini: f64,
    pub g_fin: f64,
    pub tau: Vec<f64>,
    pub g0: f64,
    pub g_mod: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    // [time]
    pub t_final: f64,
    pub dt: f64,
    pub output_stride: usize,
    // [initial]
    pub occupations: Vec<usize>,
    /// 1-based band per site.
    pub initial_bands: Vec<usize>,
    // [solver]
    pub seed: u64,
    pub starts: usize,
}

impl ScenarioConfig {
    /// Baseline: 6 bosons on a periodic 4-site ring at `s = 10`.
    pub fn defaults(scenario: ScenarioKind) -> Self {
        let base = ScenarioConfig {
            scenario,
            depth: 10.0,
            sites: 4,
            periodic: true,
            cutoff: DEFAULT_CUTOFF,
            quadrature_points: DEFAULT_POINTS_PER_SITE,
            wannier_sites: 4,
            particles: 6,
            bands_mbh: vec![1, 2, 3, 4, 5],
            bands_tdv: vec![5],
            variational_bands: vec![1],
            g: vec![0.2, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0],
            g_ini: 0.2,
            g_fin: 1.0,
            tau: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            g0: 1.0,
            g_mod: 0.1,
            omega_min: 14.0,
            omega_max: 19.0,
            omega_step: 0.05,
            t_final: 20.0,
            dt: DEFAULT_DT,
            output_stride: 10,
            occupations: vec![2, 2, 1, 1],
            initial_bands: vec![1, 1, 1, 1],
            seed: 0,
            starts: 16,
        };
        match scenario {
            ScenarioKind::GsSweep => ScenarioConfig { bands_tdv: vec![1, 2, 3, 4, 5], ..base },
            ScenarioKind::FockEvolution => {
                ScenarioConfig { bands_mbh: vec![3], bands_tdv: vec![5], g: vec![0.2], dt: 2e-3, ..base }
            }
            ScenarioKind::LinearQuench => ScenarioConfig { bands_mbh: vec![3], bands_tdv: vec![5], dt: 2e-3, ..base },
            ScenarioKind::ModulationSweep => ScenarioConfig {
                depth: 25.0,
                sites: 1,
                particles: 2,
                bands_mbh: vec![4, 5],
                bands_tdv: vec![5],
                g: vec![1.0],
                t_final: 400.0,
                output_stride: 1,
                occupations: vec![2],
                initial_bands: vec![1],
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config { location: key.to_string(), message: msg });
        if !(self.depth.is_finite() && self.depth >= 0.0) {
            return bad("lattice.depth", format!("must be finite and >= 0, got {}", self.depth));
        }
        if self.sites == 0 {
            return bad("lattice.sites", "must be at least 1".into());
        }
        if self.wannier_sites == 0 {
            return bad("lattice.wannier_sites", "must be at least 1".into());
        }
        if self.sites > 1 && self.wannier_sites != self.sites {
            return bad(
                "lattice.wannier_sites",
                format!("must equal sites ({}) unless sites = 1", self.sites),
            );
        }
        if self.cutoff < crate::lattice::MIN_CUTOFF {
            return bad("lattice.cutoff", format!("must be >= {}", crate::lattice::MIN_CUTOFF));
        }
        if self.quadrature_points < 16 {
            return bad("lattice.quadrature_points", "must be >= 16".into());
        }
        if self.particles == 0 {
            return bad("system.particles", "must be at least 1".into());
        }
        let max_bands = crate::lattice::max_bands(self.cutoff);
        for (key, list) in [("system.bands_mbh", &self.bands_mbh), ("system.bands_tdv", &self.bands_tdv)] {
            if list.is_empty() {
                return bad(key, "must list at least one band count".into());
            }
            if let Some(b) = list.iter().find(|&&b| b == 0 || b > max_bands) {
                return bad(key, format!("band count {b} outside 1..={max_bands}"));
            }
        }
        if self.variational_bands.is_empty() || self.variational_bands.iter().any(|&d| d == 0 || d > 2) {
            return bad("system.variational_bands", "entries must be 1 or 2".into());
        }
        if self.g.is_empty() || self.g.iter().any(|g| !g.is_finite()) {
            return bad("interaction.g", "must be a non-empty list of finite values".into());
        }
        for (key, v) in [
            ("interaction.g_ini", self.g_ini),
            ("interaction.g_fin", self.g_fin),
            ("interaction.g0", self.g0),
            ("interaction.g_mod", self.g_mod),
        ] {
            if !v.is_finite() {
                return bad(key, "must be finite".into());
            }
        }
        if self.tau.is_empty() || self.tau.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("interaction.tau", "must be a non-empty list of positive durations".into());
        }
        if !(self.omega_step > 0.0 && self.omega_min.is_finite() && self.omega_max >= self.omega_min) {
            return bad("interaction.omega_step", "need omega_step > 0 and omega_min <= omega_max".into());
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return bad("time.t_final", format!("must be positive, got {}", self.t_final));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("time.dt", format!("must be positive, got {}", self.dt));
        }
        if self.output_stride == 0 {
            return bad("time.output_stride", "must be at least 1".into());
        }
        if self.starts == 0 {
            return bad("solver.starts", "must be at least 1".into());
        }
        if self.scenario == ScenarioKind::FockEvolution || self.scenario == ScenarioKind::ModulationSweep {
            if self.occupations.len() != self.sites || self.initial_bands.len() != self.sites {
                return bad("initial.occupations", format!("need one entry per site ({})", self.sites));
            }
            let n: usize = self.occupations.iter().sum();
            if n != self.particles {
                return bad("initial.occupations", format!("sum {n} differs from particles {}", self.particles));
            }
            let lim = self.bands_mbh.iter().chain(&self.bands_tdv).copied().min().unwrap_or(1);
            if self.initial_bands.iter().any(|&b| b == 0 || b > lim) {
                return bad("initial.bands", format!("bands must lie in 1..={lim}"));
            }
        }
        Ok(())
    }

    /// `omega_min, omega_min + step, ...` up to `omega_max`.
    pub fn omega_grid(&self) -> Vec<f64> {
        let n = ((self.omega_max - self.omega_min) / self.omega_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.omega_min + i as f64 * self.omega_step).collect()
    }

    /// Parses config text over the defaults of `scenario`, or of the file's
    /// own `run.scenario` when `scenario` is `None`.
    pub fn parse(text: &str, origin: &str, scenario: Option<ScenarioKind>) -> Result<Self> {
        let entries = tokenize(text, origin)?;
        let declared = entries.iter().find(|e| e.section == "run" && e.key == "scenario");
        let kind = match (declared, scenario) {
            (Some(e), want) => {
                let k = ScenarioKind::parse(&e.value)
                    .ok_or_else(|| e.error(format!("unknown scenario `{}`", e.value)))?;
                if let Some(w) = want {
                    if w != k {
                        return Err(e.error(format!("file declares `{}` but `{}` was requested", k.name(), w.name())));
                    }
                }
                k
            }
            (None, Some(w)) => w,
            (None, None) => {
                return Err(Error::Config {
                    location: origin.to_string(),
                    message: "no scenario given (set run.scenario)".into(),
                })
            }
        };
        let mut cfg = Self::defaults(kind);
        let mut wannier_given = false;
        for e in &entries {
            if e.section == "lattice" && e.key == "wannier_sites" {
                wannier_given = true;
            }
            cfg.set(e).map_err(|m| e.error(m))?;
        }
        if !wannier_given {
            cfg.wannier_sites = if cfg.sites == 1 { 4 } else { cfg.sites };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like [`parse`](Self::parse), but a file without `run.scenario` takes
    /// `fallback` and a file with one keeps it.
    pub fn parse_any(text: &str, origin: &str, fallback: ScenarioKind) -> Result<Self> {
        let declared = tokenize(text, origin)?.iter().any(|e| e.section == "run" && e.key == "scenario");
        Self::parse(text, origin, if declared { None } else { Some(fallback) })
    }

    pub fn load(path: &Path, scenario: Option<ScenarioKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            location: path.display().to_string(),
            message: format!("cannot read: {e}"),
        })?;
        Self::parse(&text, &path.display().to_string(), scenario)
    }

    fn set(&mut self, e: &Entry) -> std::result::Result<(), String> {
        let v = e.value.as_str();
        match (e.section.as_str(), e.key.as_str()) {
            ("run", "scenario") => {}
            ("lattice", "depth") => self.depth = float(v)?,
            ("lattice", "sites") => self.sites = uint(v)?,
            ("lattice", "periodic") => self.periodic = boolean(v)?,
            ("lattice", "cutoff") => self.cutoff = uint(v)?,
            ("lattice", "quadrature_points") => self.quadrature_points = uint(v)?,
            ("lattice", "wannier_sites") => self.wannier_sites = uint(v)?,
            ("system", "particles") => self.particles = uint(v)?,
            ("system", "bands_mbh") => self.bands_mbh = list(v, uint)?,
            ("system", "bands_tdv") => self.bands_tdv = list(v, uint)?,
            ("system", "variational_bands") => self.variational_bands = list(v, uint)?,
            ("interaction", "g") => self.g = list(v, float)?,
            ("interaction", "g_ini") => self.g_ini = float(v)?,
            ("interaction", "g_fin") => self.g_fin = float(v)?,
            ("interaction", "tau") => self.tau = list(v, float)?,
            ("interaction", "g0") => self.g0 = float(v)?,
            ("interaction", "g_mod") => self.g_mod = float(v)?,
            ("interaction", "omega_min") => self.omega_min = float(v)?,
            ("interaction", "omega_max") => self.omega_max = float(v)?,
            ("interaction", "omega_step") => self.omega_step = float(v)?,
            ("time", "t_final") => self.t_final = float(v)?,
            ("time", "dt") => self.dt = float(v)?,
            ("time", "output_stride") => self.output_stride = uint(v)?,
            ("initial", "occupations") => self.occupations = list(v, uint)?,
            ("initial", "bands") => self.initial_bands = list(v, uint)?,
            ("solver", "seed") => self.seed = v.parse().map_err(|_| format!("expected an unsigned integer, got `{v}`"))?,
            ("solver", "starts") => self.starts = uint(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Serializes every field; `parse` of the output reproduces `self`.
    pub fn to_text(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        }
        let mut s = String::new();
        let _ = writeln!(s, "[run]\nscenario = {}", self.scenario.name());
        let _ = writeln!(
            s,
            "\n[lattice]\ndepth = {:?}\nsites = {}\nperiodic = {}\ncutoff = {}\nquadrature_points = {}\nwannier_sites = {}",
            self.depth, self.sites, self.periodic, self.cutoff, self.quadrature_points, self.wannier_sites
        );
        let _ = writeln!(
            s,
            "\n[system]\nparticles = {}\nbands_mbh = {}\nbands_tdv = {}\nvariational_bands = {}",
            self.particles,
            join(&self.bands_mbh),
            join(&self.bands_tdv),
            join(&self.variational_bands)
        );
        let floats = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let _ = writeln!(
            s,
            "\n[interaction]\ng = {}\ng_ini = {:?}\ng_fin = {:?}\ntau = {}\ng0 = {:?}\ng_mod = {:?}\nomega_min = {:?}\nomega_max = {:?}\nomega_step = {:?}",
            floats(&self.g),
            self.g_ini,
            self.g_fin,
            floats(&self.tau),
            self.g0,
            self.g_mod,
            self.omega_min,
            self.omega_max,
            self.omega_step
        );
        let _ = writeln!(
            s,
            "\n[time]\nt_final = {:?}\ndt = {:?}\noutput_stride = {}",
            self.t_final, self.dt, self.output_stride
        );
        let _ = writeln!(s, "\n[initial]\noccupations = {}\nbands = {}", join(&self.occupations), join(&self.initial_bands));
        let _ = writeln!(s, "\n[solver]\nseed = {}\nstarts = {}", self.seed, self.starts);
        s
    }
}

struct Entry {
    origin: String,
    line: usize,
    section: String,
    key: String,
    value: String,
}

impl Entry {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Config {
            location: format!("{}:{}: {}.{}", self.origin, self.line, self.section, self.key),
            message: message.into(),
        }
    }
}

fn tokenize(text: &str, origin: &str) -> Result<Vec<Entry>> {
    let mut section = String::new();
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |message: String| Error::Config { location: format!("{origin}:{}", i + 1), message };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| at(format!("malformed section header `{line}`")))?;
            section = name.trim().to_string();
            if !["run", "lattice", "system", "interaction", "time", "initial", "solver"].contains(&section.as_str()) {
                return Err(at(format!("unknown section `{section}`")));
            }
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
        if section.is_empty() {
            return Err(at("key outside of any section".into()));
        }
        let key = k.trim().to_string();
        if out.iter().any(|e| e.section == section && e.key == key) {
            return Err(at(format!("duplicate key `{section}.{key}`")));
        }
        out.push(Entry {
            origin: origin.to_string(),
            line: i + 1,
            section: section.clone(),
            key,
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

fn float(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, got `{v}`"))
}

fn uint(v: &str) -> std::result::Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn boolean(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn list<T>(v: &str, item: fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| item(x.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_baseline() {
        let c = ScenarioConfig::parse("", "t", Some(ScenarioKind::GsSweep)).unwrap();
        assert_eq!((c.depth, c.sites, c.particles, c.periodic), (10.0, 4, 6, true));
        assert_eq!(c.wannier_sites, 4);
        let m = ScenarioConfig::parse("", "t", Some(ScenarioKind::ModulationSweep)).unwrap();
        assert_eq!((m.depth, m.sites, m.particles, m.wannier_sites), (25.0, 1, 2, 4));
        assert_eq!(m.omega_grid().len(), 101);
    }

    #[test]
    fn g_list_and_errors() {
        let c = ScenarioConfig::parse("[interaction]\ng = 0.2,1,2,4\n", "t", Some(ScenarioKind::GsSweep)).unwrap();
        assert_eq!(c.g, vec![0.2, 1.0, 2.0, 4.0]);
        let e = ScenarioConfig::parse("[time]\ndt = -1e-3\n", "f.cfg", Some(ScenarioKind::FockEvolution)).unwrap_err();
        assert!(e.to_string().contains("time.dt"), "{e}");
        let e = ScenarioConfig::parse("[lattice]\ndepht = 3\n", "f.cfg", Some(ScenarioKind::GsSweep)).unwrap_err();
        assert!(e.to_string().contains("f.cfg:2") && e.to_string().contains("unknown key"), "{e}");
        let e = ScenarioConfig::parse("[lattice]\nsites = four\n", "f", Some(ScenarioKind::GsSweep)).unwrap_err();
        assert!(e.to_string().contains("lattice.sites"), "{e}");
        assert!(ScenarioConfig::parse("", "f", None).is_err());
        let e = ScenarioConfig::parse("[run]\nscenario = gs_sweep\n", "f", Some(ScenarioKind::LinearQuench));
        assert!(e.is_err());
        let e = ScenarioConfig::parse("[initial]\noccupations = 2,2,1\n", "f", Some(ScenarioKind::FockEvolution));
        assert!(e.is_err());
    }

    #[test]
    fn round_trip() {
        for kind in [
            ScenarioKind::GsSweep,
            ScenarioKind::FockEvolution,
            ScenarioKind::LinearQuench,
            ScenarioKind::ModulationSweep,
        ] {
            let mut c = ScenarioConfig::defaults(kind);
            c.g = vec![0.1, 1.0 / 3.0];
            c.dt = 1e-3 / 7.0;
            let back = ScenarioConfig::parse(&c.to_text(), "t", None).unwrap();
            assert_eq!(back, c);
        }
    }
}

//! `vbh` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 unwritable output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use vbh::cache::{self, BandData};
use vbh::config::{ScenarioConfig, ScenarioKind};
use vbh::lattice::LatticeSpec;
use vbh::output::{self, OutputDir, RunManifest, Table, OUT_DIR_ENV};
use vbh::scenarios::{self, ScenarioResult};
use vbh::Error;

const DEFAULT_OUT: &str = "vbh-out";

#[derive(Debug, Parser)]
#[command(name = "vbh", version, about = "Multiband vs. variational Bose-Hubbard experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Band structure, Wannier cache and E/J summary.
    Bands,
    /// Hubbard parameters: on-site energies, tunnelings, interaction tensor.
    Params,
    /// Ground-state energies at a single coupling (or the `--g` list).
    GroundState,
    /// Site populations from a Fock initial state.
    Evolve,
    /// Final energies after linear interaction ramps.
    Quench,
    /// Transfer efficiency under sinusoidal interaction modulation.
    Modulate,
    /// Ground-state energies over a coupling grid.
    GsSweep,
}

#[derive(Debug, Clone, Default, clap::Args)]
struct Overrides {
    /// Config file (`[section]` / `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Lattice depth in E_R.
    #[arg(long = "s", global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    sites: Option<usize>,
    #[arg(long, global = true)]
    particles: Option<usize>,
    /// Comma-separated band counts for the multiband model.
    #[arg(long, global = true, value_delimiter = ',')]
    bands_mbh: Option<Vec<usize>>,
    /// Comma-separated band counts for the variational model.
    #[arg(long, global = true, value_delimiter = ',')]
    bands_tdv: Option<Vec<usize>>,
    /// Comma-separated variational modes per site (1 or 2).
    #[arg(long, global = true, value_delimiter = ',')]
    variational_bands: Option<Vec<usize>>,
    /// Comma-separated couplings in E_R/k.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    g: Option<Vec<f64>>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to $VBH_OUT_DIR, then `vbh-out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Bands => "bands",
            Command::Params => "params",
            Command::GroundState => "ground-state",
            Command::Evolve => "evolve",
            Command::Quench => "quench",
            Command::Modulate => "modulate",
            Command::GsSweep => "gs-sweep",
        }
    }

    fn kind(self) -> ScenarioKind {
        match self {
            Command::Evolve => ScenarioKind::FockEvolution,
            Command::Quench => ScenarioKind::LinearQuench,
            Command::Modulate => ScenarioKind::ModulationSweep,
            _ => ScenarioKind::GsSweep,
        }
    }
}

enum Failure {
    Config(String),
    Numerical(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Output(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. } => Failure::Output(msg),
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::CutoffTooSmall { .. } | Error::DimensionLimit { .. } => {
                Failure::Config(msg)
            }
            _ => Failure::Numerical(msg),
        }
    }
}

/// Defaults of the single-point `ground-state` command.
fn ground_state_defaults(cfg: &mut ScenarioConfig) {
    cfg.g = vec![1.0];
    cfg.bands_mbh = vec![3];
    cfg.bands_tdv = vec![5];
    cfg.variational_bands = vec![1];
}

fn resolve_config(cmd: Command, o: &Overrides) -> Result<(ScenarioConfig, String), Failure> {
    let (mut cfg, hash) = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
            let origin = path.display().to_string();
            let cfg = match cmd {
                Command::Bands | Command::Params => ScenarioConfig::parse_any(&text, &origin, ScenarioKind::GsSweep)?,
                _ => ScenarioConfig::parse(&text, &origin, Some(cmd.kind()))?,
            };
            (cfg, output::sha256_hex(text.as_bytes()))
        }
        None => {
            let mut cfg = ScenarioConfig::defaults(cmd.kind());
            if cmd == Command::GroundState {
                ground_state_defaults(&mut cfg);
            }
            (cfg, String::new())
        }
    };
    if let Some(s) = o.s {
        cfg.depth = s;
    }
    if let Some(l) = o.sites {
        cfg.sites = l;
        cfg.wannier_sites = if l == 1 { 4 } else { l };
        if cfg.occupations.len() != l {
            // spread the particles as evenly as possible, heavier sites first
            let n = o.particles.unwrap_or(cfg.particles);
            cfg.occupations = (0..l).map(|k| n / l + usize::from(k < n % l)).collect();
            cfg.initial_bands = vec![1; l];
        }
    }
    if let Some(n) = o.particles {
        cfg.particles = n;
        if cfg.occupations.iter().sum::<usize>() != n {
            let l = cfg.sites;
            cfg.occupations = (0..l).map(|k| n / l + usize::from(k < n % l)).collect();
        }
    }
    if let Some(v) = &o.bands_mbh {
        cfg.bands_mbh = v.clone();
    }
    if let Some(v) = &o.bands_tdv {
        cfg.bands_tdv = v.clone();
    }
    if let Some(v) = &o.variational_bands {
        cfg.variational_bands = v.clone();
    }
    if let Some(v) = &o.g {
        cfg.g = v.clone();
    }
    if let Some(dt) = o.dt {
        cfg.dt = dt;
    }
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let hash = if hash.is_empty() { output::sha256_hex(cfg.to_text().as_bytes()) } else { hash };
    Ok((cfg, hash))
}

fn out_dir(o: &Overrides) -> PathBuf {
    o.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

#[derive(Serialize)]
struct Sidecar<'a> {
    table: &'a str,
    command: &'a str,
    version: &'a str,
    columns: &'a [String],
    comments: &'a [String],
    config: &'a ScenarioConfig,
}

fn write_tables(out: &mut OutputDir, tables: &[Table], command: &str, cfg: &ScenarioConfig) -> Result<(), Failure> {
    for t in tables {
        out.write_table(t)?;
        let side = Sidecar {
            table: &t.name,
            command,
            version: output::VERSION,
            columns: &t.columns,
            comments: &t.comments,
            config: cfg,
        };
        out.write_json(&format!("{}.json", t.name), &side)?;
    }
    Ok(())
}

fn band_tables(data: &BandData, g: f64) -> Vec<Table> {
    let p = &data.params;
    let mut bands = Table::new("bands", &["band", "onsite", "tunneling", "bandwidth"]);
    bands.comments.push(format!(
        "s = {:?} E_R, ring of {} sites, plane-wave cutoff {}; energies in E_R",
        data.spec.depth, data.spec.sites, data.spec.cutoff
    ));
    for a in 0..p.bands {
        bands.push(vec![(a + 1).into(), p.onsite[a].into(), p.tunneling[a].into(), data.spectrum.bandwidth(a).into()]);
    }
    let mut u = Table::new("interaction", &["a", "b", "c", "d", "u_per_g", "u"]);
    u.comments.push(format!("on-site interaction tensor; u = g U with g = {g:?} E_R/k; parity-forbidden entries omitted"));
    for a in 0..p.bands {
        for b in 0..p.bands {
            for c in 0..p.bands {
                for d in 0..p.bands {
                    if (a + b + c + d) % 2 == 1 {
                        continue;
                    }
                    let v = p.interaction.get(a, b, c, d);
                    u.push(vec![(a + 1).into(), (b + 1).into(), (c + 1).into(), (d + 1).into(), v.into(), (g * v).into()]);
                }
            }
        }
    }
    vec![bands, u]
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let cmd = cli.command;
    let (cfg, input_hash) = resolve_config(cmd, &cli.opts)?;
    let threads = match cli.opts.threads {
        Some(0) => return Err(Failure::Config("--threads must be at least 1".into())),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
            n
        }
        None => rayon::current_num_threads(),
    };
    let root = out_dir(&cli.opts);
    let mut out = OutputDir::create(&root)?;
    let cache_dir = root.join("cache");
    let mut timings = vec![("setup".to_string(), started.elapsed().as_secs_f64())];

    let t = Instant::now();
    let bands = cfg.bands_mbh.iter().chain(&cfg.bands_tdv).copied().max().unwrap_or(1);
    let spec = LatticeSpec::with_cutoff(cfg.depth, cfg.wannier_sites, cfg.cutoff)?;
    let (data, hit) = cache::load_or_compute(Some(&cache_dir), &spec, bands, cfg.quadrature_points)?;
    timings.push((if hit { "bands (cached)" } else { "bands" }.to_string(), t.elapsed().as_secs_f64()));

    let t = Instant::now();
    match cmd {
        Command::Bands => {
            let tables = band_tables(&data, cfg.g[0]);
            write_tables(&mut out, &tables[..1], cmd.name(), &cfg)?;
            let cache_name = cache::cache_file(Path::new(""), &spec, bands, cfg.quadrature_points);
            out.write_json(&cache_name.display().to_string(), &data)?;
            for a in 0..data.params.bands {
                println!("band {}: E = {:.10} E_R, J = {:.10} E_R", a + 1, data.params.onsite[a], data.params.tunneling[a]);
            }
        }
        Command::Params => {
            write_tables(&mut out, &band_tables(&data, cfg.g[0]), cmd.name(), &cfg)?;
        }
        _ => {
            let result = scenarios::run(&cfg, &data.params)?;
            timings.push(("compute".to_string(), t.elapsed().as_secs_f64()));
            let mut tables = result.tables();
            if cmd == Command::GroundState {
                tables[0].name = "ground_state".into();
            }
            write_tables(&mut out, &tables, cmd.name(), &cfg)?;
            out.write_json("result.json", &result)?;
            summarize(&result);
        }
    }
    timings.push(("write".to_string(), t.elapsed().as_secs_f64()));

    let manifest = RunManifest {
        command: cmd.name().to_string(),
        version: output::VERSION.to_string(),
        config: cfg.clone(),
        config_text: cfg.to_text(),
        input_hash,
        threads,
        outputs: out.outputs().to_vec(),
        timings,
        platform: output::platform(),
    };
    out.write_json("manifest.json", &manifest)?;
    eprintln!("wrote {} files to {}", out.outputs().len(), root.display());
    Ok(())
}

fn summarize(result: &ScenarioResult) {
    match result {
        ScenarioResult::GsSweep(r) => {
            for row in &r.rows {
                println!(
                    "g = {:<6} {} bands = {} D = {}: E = {:.10} E_R",
                    row.g,
                    row.method.name(),
                    row.bands,
                    row.modes,
                    row.energy
                );
            }
        }
        ScenarioResult::FockEvolution(r) => {
            println!("{} time points, {} series", r.times.len(), r.series.len());
        }
        ScenarioResult::LinearQuench(r) => {
            for q in &r.references {
                println!("{} bands = {}: ground energy at g_fin = {:.10} E_R", q.method.name(), q.bands, q.energy);
            }
        }
        ScenarioResult::ModulationSweep(r) => {
            for c in &r.curves {
                let peaks: Vec<String> = c.peaks.iter().take(3).map(|p| format!("{:.3} ({:.3})", p.omega, p.transfer)).collect();
                println!("{} bands = {}: peaks {}", c.method.name(), c.bands, peaks.join(", "));
            }
            println!("initial-state ground overlap {:.6}", r.initial_overlap);
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, msg) = match &f {
                Failure::Config(m) => ("config error", m),
                Failure::Numerical(m) => ("numerical failure", m),
                Failure::Output(m) => ("output error", m),
            };
            if msg.starts_with(kind) {
                eprintln!("vbh: {msg}");
            } else {
                eprintln!("vbh: {kind}: {msg}");
            }
            ExitCode::from(f.code())
        }
    }
}

use std::path::Path;
use std::process::{Command, Output};

use vbh::config::ScenarioConfig;
use vbh::output::{sha256_hex, RunManifest, OUT_DIR_ENV};

fn vbh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbh"))
        .args(args)
        .env_remove(OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn header(csv: &str) -> Vec<String> {
    let last = csv.lines().filter(|l| l.starts_with('#')).last().expect("header row");
    last.trim_start_matches('#').trim().split(',').map(String::from).collect()
}

const SMALL: &[&str] = &["--sites", "3", "--particles", "3", "--bands-mbh", "2", "--bands-tdv", "2"];

#[test]
fn bands_writes_cache_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = vbh(&["bands", "--s", "10", "--sites", "4", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    assert_eq!(header(&csv), ["band", "onsite", "tunneling", "bandwidth"]);
    let rows = data_rows(&csv);
    let p = vbh::BhParams::compute(&vbh::LatticeSpec::new(10.0, 4).unwrap(), 5, 1.0).unwrap();
    assert_eq!(rows.len(), 5);
    for (a, r) in rows.iter().enumerate() {
        assert_eq!(r[1].parse::<f64>().unwrap(), p.onsite[a]);
        assert_eq!(r[2].parse::<f64>().unwrap(), p.tunneling[a]);
    }
    let cache: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("bands-v"))
        .collect();
    assert_eq!(cache.len(), 1);
    let data: vbh::cache::BandData = serde_json::from_str(&std::fs::read_to_string(cache[0].path()).unwrap()).unwrap();
    assert_eq!(data.params, p.with_g(1.0));
}

#[test]
fn ground_state_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let mut args = vec!["ground-state", "--g", "4", "--out", out.to_str().unwrap()];
        args.extend_from_slice(SMALL);
        let o = vbh(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        csvs.push(std::fs::read(out.join("ground_state.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert_eq!(header(&text), ["g", "method", "bands", "modes", "energy", "relative_energy"]);
    assert_eq!(data_rows(&text).len(), 2);
}

#[test]
fn manifest_records_everything() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec!["gs-sweep", "--g", "0.5,2", "--seed", "3", "--threads", "1", "--out", out];
    args.extend_from_slice(SMALL);
    let o = vbh(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.command, "gs-sweep");
    assert_eq!(m.config.g, vec![0.5, 2.0]);
    assert_eq!(m.config.seed, 3);
    assert_eq!(m.threads, 1);
    // resolved config round-trips through its text form
    let reparsed = ScenarioConfig::parse(&m.config_text, "manifest", None).unwrap();
    assert_eq!(reparsed, m.config);
    for f in &m.outputs {
        let bytes = std::fs::read(dir.path().join(&f.path)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256, "{}", f.path);
    }
    assert!(m.outputs.iter().any(|f| f.path == "gs_sweep.csv"));
    assert!(m.outputs.iter().any(|f| f.path == "gs_sweep.json"));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("gs_sweep.json")).unwrap()).unwrap();
    assert_eq!(side["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(side["config"]["particles"], 3);
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn modulate_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[run]\nscenario = modulation_sweep\n[system]\nbands_mbh = 3\nbands_tdv = 3\n\
         [interaction]\nomega_min = 15.8\nomega_max = 16.0\nomega_step = 0.1\n[time]\nt_final = 2\n",
    );
    let out = dir.path().join("out");
    let o = vbh(&["modulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("modulation.csv")).unwrap();
    assert_eq!(header(&csv), ["omega", "D_mbh", "D_tdv"]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 3);
    for r in rows {
        let d: f64 = r[1].parse().unwrap();
        assert!((0.0..=1.0).contains(&d));
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let cfg = write_config(dir.path(), "[lattice]\ndepth = 10\ndpeth = 3\n");
    let o = vbh(&["gs-sweep", "--config", &cfg, "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(":3: lattice.dpeth"), "{}", stderr(&o));

    let o = vbh(&["evolve", "--dt", "-0.1", "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("time.dt"));

    let o = vbh(&["bands", "--no-such-flag"]);
    assert_eq!(code(&o), 2);

    let cfg = write_config(dir.path(), "[run]\nscenario = linear_quench\n");
    let o = vbh(&["modulate", "--config", &cfg, "--out", out]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let o = vbh(&["bands", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["evolve", "--dt", "0.5", "--out", dir.path().to_str().unwrap()];
    args.extend_from_slice(SMALL);
    let o = vbh(&args);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("drift"), "{}", stderr(&o));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("env");
    let flag_dir = dir.path().join("flag");
    let run = |extra: &[&str]| {
        let mut args = vec!["bands", "--sites", "2"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_vbh")).args(&args).env(OUT_DIR_ENV, &env_dir).output().unwrap()
    };
    assert_eq!(code(&run(&[])), 0);
    assert!(env_dir.join("manifest.json").exists());
    assert_eq!(code(&run(&["--out", flag_dir.to_str().unwrap()])), 0);
    assert!(flag_dir.join("manifest.json").exists());
}

#[test]
fn cache_hit_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut first = None;
    for _ in 0..2 {
        let o = vbh(&["params", "--sites", "2", "--g", "1.5", "--out", out]);
        assert_eq!(code(&o), 0);
        let bytes = std::fs::read(dir.path().join("interaction.csv")).unwrap();
        match &first {
            None => first = Some(bytes),
            Some(b) => assert_eq!(b, &bytes),
        }
    }
    let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(m.timings.iter().any(|(stage, _)| stage == "bands (cached)"));
}

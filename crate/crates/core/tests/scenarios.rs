//! Scenario-level behaviour on reduced grids.

use vbh::config::{ScenarioConfig, ScenarioKind};
use vbh::fock::FockBasis;
use vbh::hamiltonian::MbhHamiltonian;
use vbh::mbh::ground_state;
use vbh::params::BhParams;
use vbh::scenarios::{self, FockEvolution, Method};

fn params(cfg: &ScenarioConfig) -> BhParams {
    scenarios::band_data(cfg, None).unwrap().params
}

fn sweep(g: f64) -> scenarios::GsSweep {
    let cfg = ScenarioConfig {
        g: vec![g],
        bands_mbh: vec![3],
        bands_tdv: vec![5],
        variational_bands: vec![1],
        ..ScenarioConfig::defaults(ScenarioKind::GsSweep)
    };
    scenarios::gs_sweep(&cfg, &params(&cfg)).unwrap()
}

#[test]
fn weak_coupling_methods_agree() {
    let r = sweep(0.2);
    let d = r.energy(0.2, Method::Tdv, 5, 1).unwrap() - r.energy(0.2, Method::Mbh, 3, 0).unwrap();
    assert!(d.abs() < 0.05, "{d}");
}

#[test]
fn strong_coupling_ansatz_lies_above_exact() {
    let r = sweep(4.0);
    let d = r.energy(4.0, Method::Tdv, 5, 1).unwrap() - r.energy(4.0, Method::Mbh, 3, 0).unwrap();
    assert!(d > 0.0, "{d}");
}

fn fock(g: f64, bands: [usize; 4]) -> FockEvolution {
    let cfg = ScenarioConfig {
        g: vec![g],
        initial_bands: bands.to_vec(),
        ..ScenarioConfig::defaults(ScenarioKind::FockEvolution)
    };
    scenarios::fock_evolution(&cfg, &params(&cfg)).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn weak_coupling_populations_follow_exact_and_stay_symmetric() {
    let r = fock(0.2, [1, 1, 1, 1]);
    let mbh = &r.find(Method::Mbh, 3).unwrap().populations;
    let tdv = &r.find(Method::Tdv, 5).unwrap().populations;
    assert!(max_abs_diff(&mbh[0], &tdv[0]) < 0.05);
    // sites 1,2 and 3,4 are equivalent on the ring for (2,2,1,1)
    for p in [mbh, tdv] {
        assert!(max_abs_diff(&p[0], &p[1]) < 1e-6);
        assert!(max_abs_diff(&p[2], &p[3]) < 1e-6);
        for i in 0..r.times.len() {
            let total: f64 = p.iter().map(|s| s[i]).sum();
            assert!((total - 6.0).abs() < 1e-6);
        }
    }
}

#[test]
fn strong_coupling_populations_diverge_within_one_oscillation() {
    let r = fock(4.0, [1, 1, 1, 1]);
    let mbh = &r.find(Method::Mbh, 3).unwrap().populations;
    let tdv = &r.find(Method::Tdv, 5).unwrap().populations;
    let first = (0..r.times.len())
        .find(|&i| (0..4).any(|k| (mbh[k][i] - tdv[k][i]).abs() > 0.2))
        .expect("methods never diverge");
    // one oscillation: a site-1 population leaves its start by > 0.1 and
    // comes back within 0.01; the end of the run bounds it from below
    let back = |s: &[f64]| -> usize {
        let left = s.iter().position(|x| (x - s[0]).abs() > 0.1).unwrap_or(s.len() - 1);
        (left..s.len()).find(|&i| (s[i] - s[0]).abs() < 0.01).unwrap_or(s.len() - 1)
    };
    let period = back(&mbh[0]).min(back(&tdv[0]));
    assert!(first < period, "diverged at t={}, period ends at t={}", r.times[first], r.times[period]);
}

#[test]
fn interactions_restore_transport_out_of_third_band() {
    let frozen = fock(0.0, [1, 3, 1, 1]);
    let moving = fock(1.0, [1, 3, 1, 1]);
    let site2 = |r: &FockEvolution| r.find(Method::Tdv, 5).unwrap().populations[1].clone();
    let spread = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(spread(&site2(&frozen)) < 1e-6);
    assert!(spread(&site2(&moving)) > 1e-3, "{}", spread(&site2(&moving)));
}

#[test]
fn slow_ramps_end_nearer_the_ground_state() {
    let cfg = ScenarioConfig::defaults(ScenarioKind::LinearQuench);
    let r = scenarios::linear_quench(&cfg, &params(&cfg)).unwrap();
    let excess = |m: Method, b: usize| -> Vec<f64> {
        let e0 = r.reference(m, b).unwrap();
        cfg.tau.iter().map(|&t| r.energy(t, m, b).unwrap() - e0).collect()
    };
    let (x, y) = (excess(Method::Mbh, 3), excess(Method::Tdv, 5));
    assert!(x.last() < x.first() && y.last() < y.first());
    assert!(x.iter().chain(&y).all(|&e| e > -1e-9), "ramps cannot end below the ground state");
    let corr = pearson(&x, &y);
    assert!(corr > 0.9, "excess-energy correlation {corr}");
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn modulation(g_mod: f64, omegas: (f64, f64, f64), t_final: f64) -> (ScenarioConfig, scenarios::ModulationSweep) {
    let cfg = ScenarioConfig {
        g_mod,
        omega_min: omegas.0,
        omega_max: omegas.1,
        omega_step: omegas.2,
        t_final,
        bands_mbh: vec![4],
        ..ScenarioConfig::defaults(ScenarioKind::ModulationSweep)
    };
    let r = scenarios::modulation_sweep(&cfg, &params(&cfg)).unwrap();
    (cfg, r)
}

#[test]
fn transfer_is_a_probability() {
    let (_, r) = modulation(0.5, (14.0, 19.0, 1.0), 50.0);
    for c in &r.curves {
        assert!(c.transfer.iter().all(|d| (0.0..=1.0).contains(d)), "{:?}", c.transfer);
    }
}

#[test]
fn vanishing_drive_leaves_only_the_undriven_dephasing() {
    // the band-1 pair is not an eigenstate of the multiband Hamiltonian, so
    // even without driving D is bounded by 2 (1 - |<gs|psi0>|^2), not zero
    let (cfg, undriven) = modulation(0.0, (14.0, 14.0, 0.05), 100.0);
    let (_, weak) = modulation(1e-4, (14.0, 14.0, 0.05), 100.0);
    let p = params(&cfg).truncate(4).unwrap();
    let basis = FockBasis::new(1, 4, 2).unwrap();
    let h = MbhHamiltonian::new(&p, &basis, true).unwrap();
    let (_, gs) = ground_state(&h.at(cfg.g0).unwrap()).unwrap();
    let c0 = gs.amplitudes[basis.site_band_state(&[2], &[0]).unwrap()].norm_sqr();
    for (a, b) in undriven.curves.iter().zip(&weak.curves) {
        assert!((a.transfer[0] - b.transfer[0]).abs() < 1e-3, "{} vs {}", a.transfer[0], b.transfer[0]);
        if a.method == Method::Mbh {
            assert!(a.transfer[0] <= 2.0 * (1.0 - c0) + 1e-9, "{} > {}", a.transfer[0], 2.0 * (1.0 - c0));
        }
    }
}

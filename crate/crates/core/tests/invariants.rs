//! Randomized invariants.

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use vbh::config::{ScenarioConfig, ScenarioKind};
use vbh::fock::FockBasis;
use vbh::hamiltonian::MbhHamiltonian;
use vbh::mbh::{ground_state, site_populations};
use vbh::output::{format_float, Table};
use vbh::params::BhParams;
use vbh::propagate::Schedule;
use vbh::tdv::{embed_to_mbh, TdvModel, TdvState};
use vbh::LatticeSpec;

fn params() -> &'static BhParams {
    static P: OnceLock<BhParams> = OnceLock::new();
    P.get_or_init(|| BhParams::compute(&LatticeSpec::new(10.0, 3).unwrap(), 3, 1.0).unwrap())
}

fn unit(v: Vec<(f64, f64)>) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
    let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    z.iter_mut().for_each(|c| *c /= n);
    z
}

fn choose(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}

fn component() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..1.0, -1.0f64..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fock_ranking_is_a_bijection(sites in 1usize..4, bands in 1usize..4, particles in 1usize..5) {
        let b = FockBasis::new(sites, bands, particles).unwrap();
        let modes = (sites * bands) as u64;
        prop_assert_eq!(b.dim() as u64, choose(modes + particles as u64 - 1, particles as u64));
        for i in 0..b.dim() {
            prop_assert_eq!(b.index(b.state(i)), Some(i));
            prop_assert_eq!(b.state(i).iter().map(|&n| n as usize).sum::<usize>(), particles);
        }
    }

    #[test]
    fn csv_floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        let mut t = Table::new("t", &["x"]);
        t.push(vec![v.into()]);
        let line = t.to_csv().lines().last().unwrap().to_string();
        prop_assert_eq!(line.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn config_text_round_trips(
        depth in 1.0f64..40.0,
        g in prop::collection::vec(0.0f64..6.0, 1..5),
        seed in any::<u64>(),
        starts in 1usize..20,
    ) {
        let cfg = ScenarioConfig { depth, g, seed, starts, ..ScenarioConfig::defaults(ScenarioKind::GsSweep) };
        let back = ScenarioConfig::parse(&cfg.to_text(), "test", None).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn linear_ramp_hits_its_endpoints(g_ini in 0.0f64..5.0, g_fin in 0.0f64..5.0, tau in 0.01f64..100.0, f in 0.0f64..1.0) {
        let s = Schedule::Linear { g_ini, g_fin, tau };
        prop_assert_eq!(s.value(0.0), g_ini);
        prop_assert!((s.value(tau) - g_fin).abs() < 1e-12);
        prop_assert_eq!(s.value(2.0 * tau), g_fin);
        let mid = s.value(f * tau);
        prop_assert!(mid >= g_ini.min(g_fin) - 1e-12 && mid <= g_ini.max(g_fin) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_energy_bounds_any_state(g in 0.0f64..5.0, v in prop::collection::vec(component(), 220)) {
        // 3 sites, 3 bands, 4 particles: dim C(12, 4) = 495; use the first
        // 220 basis states plus zeros
        let basis = FockBasis::new(3, 3, 4).unwrap();
        let h = MbhHamiltonian::new(params(), &basis, true).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); basis.dim()];
        psi[..v.len()].copy_from_slice(&unit(v));
        let (e0, _) = ground_state(&h.at(g).unwrap()).unwrap();
        prop_assert!(h.energy(g, &psi) >= e0 - 1e-9);
        let pops = site_populations(&basis, &psi);
        prop_assert!((pops.iter().sum::<f64>() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn variational_energy_is_an_expectation(
        g in 0.0f64..5.0,
        frames in prop::collection::vec(component(), 9),
        amp in component(),
    ) {
        // single-mode state on 3 sites with 3 fixed bands; particles 1, 2, 1
        let mut d = Vec::new();
        for k in 0..3 {
            d.extend(unit(frames[3 * k..3 * k + 3].to_vec()));
        }
        let reduced = FockBasis::new(3, 1, 4).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); reduced.dim()];
        let i = reduced.site_band_state(&[1, 2, 1], &[0, 0, 0]).unwrap();
        c[i] = unit(vec![amp])[0];
        let state = TdvState::new(3, 3, 1, 4, d, c).unwrap();
        let model = TdvModel::new(params(), 3, 4, 1, true).unwrap();
        let basis = FockBasis::new(3, 3, 4).unwrap();
        let h = MbhHamiltonian::new(params(), &basis, true).unwrap();
        let psi = embed_to_mbh(&state, &basis).unwrap().amplitudes;
        let e = model.energy(&state, g).unwrap();
        prop_assert!((e - h.energy(g, &psi)).abs() < 1e-8 * e.abs().max(1.0));
        let (e0, _) = ground_state(&h.at(g).unwrap()).unwrap();
        prop_assert!(e >= e0 - 1e-9);
    }
}

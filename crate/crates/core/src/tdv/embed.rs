use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::state::TdvState;
use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::mbh::MbhState;

type Local = Vec<(Vec<u8>, Complex64)>;

/// `prod_kappa (sum_a d^{a kappa} b+_a)^{n_kappa} / sqrt(n_kappa!) |0>` on one site.
fn local_expansion(state: &TdvState, site: usize, occ: &[u8], bands: usize) -> Local {
    let mut cur: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    cur.insert(vec![0u8; bands], Complex64::new(1.0, 0.0));
    for (kappa, &n) in occ.iter().enumerate() {
        for _ in 0..n {
            let mut next = BTreeMap::new();
            for (o, amp) in &cur {
                for a in 0..state.fixed_bands {
                    let d = state.d(site, a, kappa);
                    if d == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut o2 = o.clone();
                    o2[a] += 1;
                    let v = amp * d * (o2[a] as f64).sqrt();
                    *next.entry(o2).or_insert(Complex64::new(0.0, 0.0)) += v;
                }
            }
            cur = next;
        }
        let fact: f64 = (1..=n as u64).map(|i| i as f64).product();
        let s = fact.sqrt();
        cur.values_mut().for_each(|v| *v /= s);
    }
    cur.into_iter().collect()
}

/// Expands a variational state over the multiband Fock basis.
pub fn embed_to_mbh(state: &TdvState, basis: &FockBasis) -> Result<MbhState> {
    if basis.sites() != state.sites || basis.particles() != state.particles {
        return Err(Error::Mismatch(format!(
            "basis (L={}, N={}) does not match state (L={}, N={})",
            basis.sites(),
            basis.particles(),
            state.sites,
            state.particles
        )));
    }
    if basis.bands() < state.fixed_bands {
        return Err(Error::Mismatch(format!(
            "basis has {} bands, state spans {}",
            basis.bands(),
            state.fixed_bands
        )));
    }
    let reduced = state.reduced_basis()?;
    let d = state.modes;
    let bands = basis.bands();
    let mut cache: HashMap<(usize, Vec<u8>), Local> = HashMap::new();
    let mut out = vec![Complex64::new(0.0, 0.0); basis.dim()];
    let mut occ = vec![0u8; basis.modes()];
    for (i, red) in reduced.iter().enumerate() {
        let c = state.amplitudes[i];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let locals: Vec<Local> = (0..state.sites)
            .map(|k| {
                let key = (k, red[k * d..(k + 1) * d].to_vec());
                cache
                    .entry(key)
                    .or_insert_with_key(|key| local_expansion(state, k, &key.1, bands))
                    .clone()
            })
            .collect();
        accumulate(&locals, 0, c, bands, &mut occ, basis, &mut out);
    }
    Ok(MbhState::new(out))
}

fn accumulate(
    locals: &[Local],
    site: usize,
    amp: Complex64,
    bands: usize,
    occ: &mut [u8],
    basis: &FockBasis,
    out: &mut [Complex64],
) {
    if site == locals.len() {
        let idx = basis.index(occ).expect("embedded state conserves N");
        out[idx] += amp;
        return;
    }
    for (o, a) in &locals[site] {
        occ[site * bands..(site + 1) * bands].copy_from_slice(o);
        accumulate(locals, site + 1, amp * a, bands, occ, basis, out);
    }
}

//! Best single-mode approximation of the two-boson state with one
//! particle in band 1 and one in band 3 on a single site.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::embed::embed_to_mbh;
use super::state::TdvState;
use crate::fock::FockBasis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psi13Bound {
    pub alpha: f64,
    pub beta: f64,
    pub overlap: f64,
}

/// `|<1_1 1_3 | (alpha b+_1 + beta b+_3)^2 / sqrt(2) |0>|`.
pub fn psi13_overlap(alpha: f64, beta: f64) -> f64 {
    let c = |x: f64| Complex64::new(x, 0.0);
    let state = TdvState::new(1, 3, 1, 2, vec![c(alpha), c(0.0), c(beta)], vec![c(1.0)])
        .expect("fixed single-site shape");
    let basis = FockBasis::new(1, 3, 2).expect("tiny basis");
    let target = basis.index(&[1, 0, 1]).expect("valid occupation");
    embed_to_mbh(&state, &basis).expect("shapes match").amplitudes[target].norm()
}

/// Maximizes the overlap over `(alpha, beta) = (cos t, sin t)`.
pub fn psi13_overlap_bound() -> Psi13Bound {
    let f = |t: f64| psi13_overlap(t.cos(), t.sin());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, std::f64::consts::FRAC_PI_2);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    let t = 0.5 * (a + b);
    Psi13Bound { alpha: t.cos(), beta: t.sin(), overlap: f(t) }
}

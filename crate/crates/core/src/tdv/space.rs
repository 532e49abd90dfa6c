//! The reduced Fock space of `D` variational modes per site, with the
//! one- and two-body operators precomputed as sparse triplet lists.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{apply_ladder, FockBasis, Ladder};
use crate::lattice::bonds;

/// Sparse operator entries `(row, col, <row|op|col>)`.
pub(crate) type Triplets = Vec<(u32, u32, f64)>;

#[derive(Debug, Clone)]
pub struct ReducedSpace {
    basis: FockBasis,
    periodic: bool,
    bonds: Vec<(usize, usize)>,
    /// `b+_p b_q` for every mode pair, at `p * modes + q`
    one_body: Vec<Triplets>,
    /// `b+_k b+_l b_m b_n` on one site, at `site * D^4 + ((k D + l) D + m) D + n`
    two_body: Vec<Triplets>,
}

fn operator(basis: &FockBasis, ops: &[(usize, Ladder)]) -> Triplets {
    let mut out = Vec::new();
    let mut scratch = vec![0u8; basis.modes()];
    for col in 0..basis.dim() {
        scratch.copy_from_slice(basis.state(col));
        let mut amp = 1.0;
        let mut alive = true;
        // rightmost operator acts first
        for &(mode, kind) in ops.iter().rev() {
            match apply_ladder(&mut scratch, mode, kind) {
                Some(a) => amp *= a,
                None => {
                    alive = false;
                    break;
                }
            }
        }
        if alive {
            let row = basis.index(&scratch).expect("number-conserving operator");
            out.push((row as u32, col as u32, amp));
        }
    }
    out
}

impl ReducedSpace {
    pub fn new(sites: usize, modes: usize, particles: usize, periodic: bool) -> Result<Self> {
        let basis = FockBasis::new(sites, modes, particles)?;
        let m = basis.modes();
        let one_body = (0..m * m)
            .map(|pq| operator(&basis, &[(pq / m, Ladder::Create), (pq % m, Ladder::Annihilate)]))
            .collect();
        let d = modes;
        let d4 = d * d * d * d;
        let mut two_body = Vec::with_capacity(sites * d4);
        for k in 0..sites {
            for idx in 0..d4 {
                let (a, b, c, e) = (idx / (d * d * d), (idx / (d * d)) % d, (idx / d) % d, idx % d);
                let mode = |x| basis.mode(k, x);
                two_body.push(operator(
                    &basis,
                    &[
                        (mode(a), Ladder::Create),
                        (mode(b), Ladder::Create),
                        (mode(c), Ladder::Annihilate),
                        (mode(e), Ladder::Annihilate),
                    ],
                ));
            }
        }
        Ok(ReducedSpace { bonds: bonds(sites, periodic), basis, periodic, one_body, two_body })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn sites(&self) -> usize {
        self.basis.sites()
    }

    /// Variational modes per site, `D`.
    pub fn modes(&self) -> usize {
        self.basis.bands()
    }

    pub fn particles(&self) -> usize {
        self.basis.particles()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub(crate) fn one_body(&self, p: usize, q: usize) -> &Triplets {
        &self.one_body[p * self.basis.modes() + q]
    }

    pub(crate) fn two_body(&self, site: usize, idx: usize) -> &Triplets {
        let d = self.modes();
        &self.two_body[site * d * d * d * d + idx]
    }

    pub(crate) fn check_len(&self, c: &[Complex64]) -> Result<()> {
        if c.len() != self.dim() {
            return Err(Error::Mismatch(format!(
                "amplitude vector has length {}, reduced basis {}",
                c.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

pub(crate) fn expectation(op: &Triplets, c: &[Complex64]) -> Complex64 {
    op.iter().map(|&(r, s, a)| c[r as usize].conj() * c[s as usize] * a).sum()
}

pub(crate) fn apply_scaled(op: &Triplets, scale: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    if scale == Complex64::new(0.0, 0.0) {
        return;
    }
    for &(r, s, a) in op {
        y[r as usize] += scale * a * x[s as usize];
    }
}

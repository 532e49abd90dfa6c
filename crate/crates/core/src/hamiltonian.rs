//! Sparse assembly of the multiband Bose-Hubbard Hamiltonian.
//!
//! All parameters are real, so the matrix is real symmetric; states stay
//! complex for time evolution.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::lattice::bonds;
use crate::params::BhParams;

/// Real symmetric matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

/// Anything that can multiply a real vector; used by the eigensolver.
pub trait RealOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_real(&self, x: &[f64], y: &mut [f64]);
}

impl SparseHamiltonian {
    fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Self {
        let dim = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseHamiltonian { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .zip(&self.vals[range])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&(j as u32)) {
            Ok(pos) => self.vals[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|H_ij - H_ji|` over stored entries.
    pub fn hermiticity_error(&self) -> f64 {
        (0..self.dim)
            .into_par_iter()
            .map(|i| {
                self.row(i)
                    .map(|(j, v)| (v - self.get(j, i)).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `y = H x` for complex vectors.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.par_iter_mut().enumerate().with_min_len(512).for_each(|(i, yi)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *yi = acc;
        });
    }

    /// `y += scale * H x`.
    pub fn apply_add(&self, scale: f64, x: &[Complex64], y: &mut [Complex64]) {
        y.par_iter_mut().enumerate().with_min_len(512).for_each(|(i, yi)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *yi += acc * scale;
        });
    }

    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// `a + scale * b`, merging sparsity patterns.
    pub fn combine(a: &Self, b: &Self, scale: f64) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::Mismatch(format!("{} vs {}", a.dim, b.dim)));
        }
        let rows = (0..a.dim)
            .into_par_iter()
            .map(|i| {
                let mut row: Vec<(u32, f64)> = a
                    .row(i)
                    .map(|(j, v)| (j as u32, v))
                    .chain(b.row(i).map(|(j, v)| (j as u32, scale * v)))
                    .collect();
                merge_row(&mut row);
                row
            })
            .collect();
        Ok(Self::from_rows(rows))
    }

    /// Coordinate-list dump: one `row col value` line per entry.
    pub fn write_coo(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "# dim {} nnz {}", self.dim, self.nnz()).map_err(|e| Error::io(path, e))?;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:.16e}").map_err(|e| Error::io(path, e))?;
            }
        }
        Ok(())
    }
}

impl RealOperator for SparseHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(512).for_each(|(i, yi)| {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *yi = acc;
        });
    }
}

fn merge_row(row: &mut Vec<(u32, f64)>) {
    row.sort_unstable_by_key(|&(c, _)| c);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(row.len());
    for &(c, v) in row.iter() {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    *row = out;
}

#[derive(Debug, Clone, Copy)]
struct Weights {
    single: f64,
    interaction: f64,
}

fn row_entries(
    params: &BhParams,
    basis: &FockBasis,
    bond_list: &[(usize, usize)],
    index: usize,
    w: Weights,
) -> Vec<(u32, f64)> {
    let bands = basis.bands();
    let occ = basis.state(index);
    let mut row = Vec::new();
    let mut scratch = occ.to_vec();

    if w.single != 0.0 {
        let mut diag = 0.0;
        for k in 0..basis.sites() {
            for a in 0..bands {
                diag += params.onsite[a] * occ[basis.mode(k, a)] as f64;
            }
        }
        row.push((index as u32, w.single * diag));
        for &(k, l) in bond_list {
            for a in 0..bands {
                let j = params.tunneling[a];
                if j == 0.0 {
                    continue;
                }
                for (from, to) in [(basis.mode(l, a), basis.mode(k, a)), (basis.mode(k, a), basis.mode(l, a))] {
                    let n_from = occ[from];
                    if n_from == 0 {
                        continue;
                    }
                    let amp = (n_from as f64).sqrt() * ((occ[to] + 1) as f64).sqrt();
                    scratch[from] -= 1;
                    scratch[to] += 1;
                    let col = basis.index(&scratch).expect("hop stays in basis");
                    scratch[from] += 1;
                    scratch[to] -= 1;
                    row.push((col as u32, -w.single * j * amp));
                }
            }
        }
    }

    if w.interaction != 0.0 {
        // (1/2) sum U b+_a b+_b b_c b_d, with ordered pairs folded into
        // unordered ones (U is symmetric under a<->b and c<->d)
        let u = &params.interaction;
        for k in 0..basis.sites() {
            let base = basis.mode(k, 0);
            for c in 0..bands {
                for d in c..bands {
                    let nc = occ[base + c] as f64;
                    let nd = occ[base + d] as f64;
                    let (annihilate, mult_cd) = if c == d {
                        ((nc * (nc - 1.0)).max(0.0).sqrt(), 1.0)
                    } else {
                        ((nc * nd).sqrt(), 2.0)
                    };
                    if annihilate == 0.0 {
                        continue;
                    }
                    scratch[base + c] -= 1;
                    scratch[base + d] -= 1;
                    for a in 0..bands {
                        for b in a..bands {
                            let uv = u.get(a, b, c, d);
                            if uv == 0.0 {
                                continue;
                            }
                            let mult_ab = if a == b { 1.0 } else { 2.0 };
                            let na = scratch[base + a] as f64;
                            let create = if a == b {
                                ((na + 1.0) * (na + 2.0)).sqrt()
                            } else {
                                ((na + 1.0) * (scratch[base + b] as f64 + 1.0)).sqrt()
                            };
                            scratch[base + a] += 1;
                            scratch[base + b] += 1;
                            let col = basis.index(&scratch).expect("interaction stays in basis");
                            scratch[base + a] -= 1;
                            scratch[base + b] -= 1;
                            let value = 0.5 * mult_ab * mult_cd * uv * annihilate * create;
                            row.push((col as u32, w.interaction * value));
                        }
                    }
                    scratch[base + c] += 1;
                    scratch[base + d] += 1;
                }
            }
        }
    }

    merge_row(&mut row);
    row
}

fn assemble(params: &BhParams, basis: &FockBasis, periodic: bool, w: Weights) -> Result<SparseHamiltonian> {
    if params.bands != basis.bands() {
        return Err(Error::Mismatch(format!(
            "parameters have {} bands, basis has {}",
            params.bands,
            basis.bands()
        )));
    }
    let bond_list = bonds(basis.sites(), periodic);
    let rows: Vec<_> = (0..basis.dim())
        .into_par_iter()
        .with_min_len(256)
        .map(|i| row_entries(params, basis, &bond_list, i, w))
        .collect();
    Ok(SparseHamiltonian::from_rows(rows))
}

/// Full Hamiltonian at the coupling stored in `params`.
pub fn build_mbh_hamiltonian(params: &BhParams, basis: &FockBasis, periodic: bool) -> Result<SparseHamiltonian> {
    assemble(params, basis, periodic, Weights { single: 1.0, interaction: params.g })
}

/// `H(g) = H_single + g H_interaction`, both parts assembled once.
#[derive(Debug, Clone)]
pub struct MbhHamiltonian {
    pub single: SparseHamiltonian,
    pub interaction: SparseHamiltonian,
}

impl MbhHamiltonian {
    pub fn new(params: &BhParams, basis: &FockBasis, periodic: bool) -> Result<Self> {
        Ok(MbhHamiltonian {
            single: assemble(params, basis, periodic, Weights { single: 1.0, interaction: 0.0 })?,
            interaction: assemble(params, basis, periodic, Weights { single: 0.0, interaction: 1.0 })?,
        })
    }

    pub fn dim(&self) -> usize {
        self.single.dim()
    }

    pub fn at(&self, g: f64) -> Result<SparseHamiltonian> {
        SparseHamiltonian::combine(&self.single, &self.interaction, g)
    }

    /// `y = (H(g) - offset) x`.
    pub fn apply(&self, g: f64, offset: f64, x: &[Complex64], y: &mut [Complex64]) {
        self.single.apply(x, y);
        if g != 0.0 {
            self.interaction.apply_add(g, x, y);
        }
        if offset != 0.0 {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi -= xi * offset;
            }
        }
    }

    pub fn energy(&self, g: f64, x: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(g, 0.0, x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

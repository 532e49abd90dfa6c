//! Multiband Bose-Hubbard (MBH) exact dynamics and the time-dependent
//! variational (TDV) single-mode-per-site method for bosons in a 1D
//! optical lattice.
//!
//! Units throughout: energies in recoil energies `E_R`, lengths in lattice
//! constants `a`, times in `hbar / E_R`. The contact coupling `g` is measured in
//! `E_R / k`, with `k = pi / a` the lattice wave number.

pub mod cache;
pub mod config;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod lanczos;
pub mod lattice;
pub mod mbh;
pub mod output;
pub mod params;
pub mod propagate;
pub mod quadrature;
pub mod scenarios;
pub mod tdv;
pub mod wannier;

pub use error::{Error, Result};
pub use fock::FockBasis;
pub use hamiltonian::{build_mbh_hamiltonian, MbhHamiltonian, SparseHamiltonian};
pub use lattice::{solve_bloch, BlochSpectrum, LatticeSpec};
pub use params::BhParams;
pub use tdv::{embed_to_mbh, TdvModel, TdvState};
pub use wannier::{build_wannier, WannierBasis};

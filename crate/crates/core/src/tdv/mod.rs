//! Time-dependent variational method: `D` variational modes per site, each
//! a superposition of `N_V` fixed Wannier bands, plus amplitudes over the
//! reduced Fock space of those modes.
//!
//! Single-mode (`D = 1`) states can be propagated; `D >= 2` is supported
//! for ground states only.

mod embed;
mod ground;
mod model;
mod projection;
mod psi13;
mod space;
mod state;

pub use embed::embed_to_mbh;
pub use ground::{tdv_ground_state, widen_frames, GroundState, MinimizeOptions, StartLog};
pub use model::{overlap, TdvModel, TdvTrajectory, EMPTY_SITE_THRESHOLD};
pub use projection::{Densities, ProjectedParams, TdvDensities, TdvParameters};
pub use psi13::{psi13_overlap, psi13_overlap_bound, Psi13Bound};
pub use space::ReducedSpace;
pub use state::{TdvState, STATE_TOLERANCE};

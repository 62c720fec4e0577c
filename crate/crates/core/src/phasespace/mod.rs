//! Phase-space and entanglement diagnostics on reduced density matrices.

mod two_mode;
mod wigner;

pub use two_mode::{
    disentangle_search, entanglement_negativity, rotation_matrix, tdhf_amplitudes, tdhf_state, two_mode_bs_transform,
    BsSearchResult, SearchOptions,
};
pub use wigner::{wigner, wigner_at, wigner_negativity_volume, GridSpec, NegativityOptions, WignerGrid};

use crate::density::FockDensityMatrix;

/// `Tr ρ²`.
pub fn purity(rho: &FockDensityMatrix) -> f64 {
    rho.purity()
}

//! Independent reference implementations used to check the MPS machinery:
//! exact dense evolution, second-quantized lifts of linear interferometers,
//! classical mean-field integrators, and analytic pulse waveforms.

pub mod classical;
pub mod dense;
pub mod lift;
pub mod waveforms;

pub use dense::{
    dense_evolve, dense_hamiltonian_chi2, dense_hamiltonian_chi3, dense_propagator, DenseState, DENSE_CAP,
};
pub use lift::{complete_to_unitary, lift_interferometer};
pub use classical::{split_step_chi2, split_step_chi3, ClassicalField};
pub use waveforms::{breather_pulse, sech_pulse, simulton_pulse, Grid, PulseMode};

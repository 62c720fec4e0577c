//! Time stepping: TEBD sweeps, Monte-Carlo wavefunction loss, and
//! trajectory ensembles.

mod ensemble;
mod mcwf;
mod series;
mod tebd;

pub use ensemble::{average_matrices, run_ensemble, trajectory_rng};
pub use mcwf::{mcwf_step, LossModel, JUMP_PROBABILITY_LIMIT};
pub use series::ObservableSeries;
pub use tebd::{apply_schedule, propagate, tebd_run, Jump, Recorder, RunOptions, RunOutcome};

#[cfg(test)]
mod tests;

//! Matrix-product-state propagation of broadband quantum optical pulses.
//!
//! The crate covers the discretized χ³ (Kerr) and χ² (three-wave mixing)
//! waveguide models, TEBD time stepping with optional Monte-Carlo
//! wavefunction loss, supermode demultiplexing of an MPS into local bins, and
//! phase-space diagnostics on the resulting reduced density matrices.

pub mod config;
pub mod demux;
pub mod density;
pub mod error;
pub mod evolve;
pub mod export;
pub mod fock;
pub mod linalg;
pub mod gates;
pub mod mps;
pub mod oracles;
pub mod phasespace;
pub mod scenario;

pub use error::{Error, Result};
pub use mps::{init_coherent_mps, LocalMPO, Truncation, TwoSiteGate, VidalMPS};

//! Local propagators for the discretized χ³ and χ² waveguide Hamiltonians
//! and their Trotter schedules.
//!
//! χ³ (Bose-Hubbard) chain, one site per bin:
//!
//! ```text
//! H = Σ_m [ −(a†_m a_{m+1} + h.c.)/(2Δz²) + n_m/Δz² − a†²_m a²_m/(2Δz) ]
//! ```
//!
//! χ² chain, two sites per bin in the order `a1, b1, a2, b2, …`:
//!
//! ```text
//! H = Σ_m [ H_a,m + β H_b,m + (a†²_m b_m + a²_m b†_m)/(2√Δz) ]
//! ```
//!
//! where `H_a` and `H_b` have the same hopping/on-site form as the χ³
//! dispersion term.

mod schedule;

pub use schedule::{
    chi2_schedule, chi3_schedule, Chi2Params, Chi3Params, GateSchedule, Placement, TrotterVariant,
};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock;
use crate::linalg::{self, kron, CMatrix};
use crate::mps::TwoSiteGate;

/// `exp(i δt a†² a² / 2Δz)`: diagonal with entries `e^{i δt n(n−1)/(2Δz)}`.
pub fn spm_gate(dz: f64, dt: f64, d: usize) -> CMatrix {
    fock::phase_diagonal(d, |n| dt * (n * n.saturating_sub(1)) as f64 / (2.0 * dz))
}

/// `exp(−i δt n / (2Δz²))`, the on-site dispersion weight an open chain's
/// end bin misses from the pairwise hopping gates.
pub fn edge_gate(dz: f64, dt: f64, coeff: f64, d: usize) -> CMatrix {
    fock::phase_diagonal(d, |n| -coeff * dt * n as f64 / (2.0 * dz * dz))
}

/// Hopping generator `a†b + ab† − n_a − n_b` on two sites of dimension `d`.
pub fn hopping_generator(d: usize) -> CMatrix {
    let a = fock::annihilation(d);
    let id = linalg::identity(d);
    let a1 = kron(&a, &id);
    let a2 = kron(&id, &a);
    let n1 = kron(&fock::number(d), &id);
    let n2 = kron(&id, &fock::number(d));
    a1.adjoint() * &a2 + &a1 * a2.adjoint() - n1 - n2
}

/// `exp[i·coeff·δt/(2Δz²)(a†b + ab† − n_a − n_b)]`.
pub fn hopping_gate(dz: f64, dt: f64, coeff: f64, d: usize) -> Result<TwoSiteGate> {
    let u = linalg::exp_i_hermitian(&hopping_generator(d), coeff * dt / (2.0 * dz * dz))?;
    TwoSiteGate::new(d, d, u)
}

/// Three-wave-mixing term `(a†² b + a² b†)/(2√Δz)` on `(FH, SH)` sites.
pub fn nl3wm_hamiltonian(dz: f64, d_a: usize, d_b: usize) -> CMatrix {
    let a = kron(&fock::annihilation(d_a), &linalg::identity(d_b));
    let b = kron(&linalg::identity(d_a), &fock::annihilation(d_b));
    let ad = a.adjoint();
    let t = &ad * &ad * &b;
    (&t + t.adjoint()) * C64::new(1.0 / (2.0 * dz.sqrt()), 0.0)
}

/// `exp(−i δt H_NL)` on the `(a_m, b_m)` pair.
pub fn nl3wm_gate(dz: f64, dt: f64, d_a: usize, d_b: usize) -> Result<TwoSiteGate> {
    if d_a < 2 {
        return Err(Error::Validation("three-wave mixing needs an FH cutoff of at least 2".into()));
    }
    let u = linalg::exp_i_hermitian(&nl3wm_hamiltonian(dz, d_a, d_b), -dt)?;
    TwoSiteGate::new(d_a, d_b, u)
}

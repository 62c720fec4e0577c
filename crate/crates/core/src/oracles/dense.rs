//! Exact state-vector evolution on the full truncated product space.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock;
use crate::gates::{Chi2Params, Chi3Params};
use crate::linalg::{self, CMatrix, ONE, ZERO};

/// Largest product-space dimension the dense oracles accept.
pub const DENSE_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct DenseState {
    pub dims: Vec<usize>,
    pub psi: Vec<C64>,
}

impl DenseState {
    pub fn new(dims: &[usize], psi: Vec<C64>) -> Result<Self> {
        let total = check_dims(dims)?;
        if psi.len() != total {
            return Err(Error::Validation(format!("vector length {} vs dimension {total}", psi.len())));
        }
        Ok(DenseState { dims: dims.to_vec(), psi })
    }

    pub fn norm_squared(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn expect(&self, op: &CMatrix) -> C64 {
        let v = CMatrix::from_column_slice(self.psi.len(), 1, &self.psi);
        (v.adjoint() * op * &v)[(0, 0)]
    }

    pub fn overlap(&self, other: &DenseState) -> C64 {
        self.psi.iter().zip(&other.psi).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &DenseState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    pub fn apply(&self, op: &CMatrix) -> DenseState {
        let v = CMatrix::from_column_slice(self.psi.len(), 1, &self.psi);
        DenseState { dims: self.dims.clone(), psi: (op * v).iter().copied().collect() }
    }

    /// Reduced density matrix of the leftmost `s` sites.
    pub fn reduced_density_matrix(&self, s: usize) -> Result<CMatrix> {
        if s == 0 || s > self.dims.len() {
            return Err(Error::Validation(format!("cannot keep {s} of {} sites", self.dims.len())));
        }
        let keep: usize = self.dims[..s].iter().product();
        let rest = self.psi.len() / keep;
        // psi viewed as keep × rest (row-major)
        let m = CMatrix::from_row_slice(keep, rest, &self.psi);
        Ok(&m * m.adjoint())
    }
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Validation("dense oracle needs nonempty positive dims".into()));
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if total > DENSE_CAP {
        return Err(Error::Validation(format!("dense dimension {total} exceeds cap {DENSE_CAP}")));
    }
    Ok(total)
}

/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1` with `op` at `site` (site 0 most significant).
pub fn site_operator(dims: &[usize], site: usize, op: &CMatrix) -> CMatrix {
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    linalg::kron(&linalg::kron(&linalg::identity(left), op), &linalg::identity(right))
}

pub fn annihilators(dims: &[usize]) -> Vec<CMatrix> {
    (0..dims.len()).map(|m| site_operator(dims, m, &fock::annihilation(dims[m]))).collect()
}

/// Quadratic dispersion `Σ_m n_m/Δz² − Σ_m (a†_m a_{m+1} + h.c.)/(2Δz²)` over
/// the given mode operators, scaled by `coeff`.
fn dispersion(modes: &[CMatrix], dz: f64, coeff: f64) -> CMatrix {
    let dim = modes[0].nrows();
    let mut h = CMatrix::zeros(dim, dim);
    let w = C64::new(coeff / (dz * dz), 0.0);
    for (m, a) in modes.iter().enumerate() {
        h += a.adjoint() * a * w;
        if m + 1 < modes.len() {
            let hop = a.adjoint() * &modes[m + 1];
            h -= (&hop + hop.adjoint()) * (w * 0.5);
        }
    }
    h
}

/// Dense χ³ Bose-Hubbard Hamiltonian with open ends.
pub fn dense_hamiltonian_chi3(params: &Chi3Params, d: usize) -> Result<CMatrix> {
    let dims = vec![d; params.n_bins];
    check_dims(&dims)?;
    let dz = params.dz();
    let modes = annihilators(&dims);
    let mut h = dispersion(&modes, dz, 1.0);
    for a in &modes {
        let ad = a.adjoint();
        h -= &ad * &ad * a * a * C64::new(1.0 / (2.0 * dz), 0.0);
    }
    Ok(h)
}

/// Dense χ² Hamiltonian on the interleaved layout `a1, b1, a2, b2, …`.
pub fn dense_hamiltonian_chi2(params: &Chi2Params, d_a: usize, d_b: usize) -> Result<CMatrix> {
    let dims: Vec<usize> = (0..2 * params.n_bins).map(|k| if k % 2 == 0 { d_a } else { d_b }).collect();
    check_dims(&dims)?;
    let dz = params.dz();
    let all = annihilators(&dims);
    let a: Vec<CMatrix> = all.iter().step_by(2).cloned().collect();
    let b: Vec<CMatrix> = all.iter().skip(1).step_by(2).cloned().collect();
    let mut h = dispersion(&a, dz, 1.0) + dispersion(&b, dz, params.beta);
    let g = C64::new(1.0 / (2.0 * dz.sqrt()), 0.0);
    for (am, bm) in a.iter().zip(&b) {
        let ad = am.adjoint();
        let t = &ad * &ad * bm;
        h += (&t + t.adjoint()) * g;
    }
    Ok(h)
}

/// `e^{−iHt}` from the eigendecomposition of `H`.
pub fn dense_propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    if linalg::hermiticity_defect(h) > 1e-10 * (1.0 + h.norm()) {
        return Err(Error::Validation("Hamiltonian is not Hermitian".into()));
    }
    linalg::exp_i_hermitian(h, -t)
}

pub fn dense_evolve(initial: &DenseState, h: &CMatrix, t: f64) -> Result<DenseState> {
    if h.nrows() != initial.psi.len() {
        return Err(Error::Validation("Hamiltonian and state dimensions differ".into()));
    }
    Ok(initial.apply(&dense_propagator(h, t)?))
}

/// Tensor product of local vectors, site 0 most significant.
pub fn product_state(locals: &[Vec<C64>]) -> Result<DenseState> {
    let dims: Vec<usize> = locals.iter().map(|v| v.len()).collect();
    check_dims(&dims)?;
    let mut psi = vec![ONE];
    for v in locals {
        let mut next = vec![ZERO; psi.len() * v.len()];
        for (p, &x) in psi.iter().enumerate() {
            for (i, &y) in v.iter().enumerate() {
                next[p * v.len() + i] = x * y;
            }
        }
        psi = next;
    }
    DenseState::new(&dims, psi)
}

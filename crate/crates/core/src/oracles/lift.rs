//! Second-quantized action of a linear interferometer, built by expanding
//! creation-operator polynomials on the Fock basis.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};

/// Many-body operator of the mode transformation `U` on the truncated space
/// with per-mode cutoffs `dims`:
/// `lift(U)|n⟩ = Π_ℓ (Σ_m U_{mℓ} a_m†)^{n_ℓ}/√(n_ℓ!) |0⟩`,
/// so that `lift(U)† a_m lift(U) = Σ_ℓ U_{mℓ} a_ℓ`. Components leaving the
/// truncated space are dropped; the result is exact on states whose total
/// photon number fits every cutoff.
pub fn lift_interferometer(u: &CMatrix, dims: &[usize]) -> Result<CMatrix> {
    let k = dims.len();
    if u.shape() != (k, k) {
        return Err(Error::Validation(format!("interferometer {:?} for {k} modes", u.shape())));
    }
    let total: usize = dims.iter().product();
    if total > super::DENSE_CAP {
        return Err(Error::Validation(format!("lifted dimension {total} exceeds {}", super::DENSE_CAP)));
    }
    let mut out = CMatrix::zeros(total, total);
    for col in 0..total {
        let occ = unflatten(col, dims);
        let mut poly: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
        poly.insert(vec![0; k], ONE);
        for (l, &nl) in occ.iter().enumerate() {
            for _ in 0..nl {
                let mut next: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
                for (key, amp) in &poly {
                    for m in 0..k {
                        let c = u[(m, l)];
                        if c == ZERO {
                            continue;
                        }
                        let mut key2 = key.clone();
                        key2[m] += 1;
                        let w = amp * c * (key2[m] as f64).sqrt();
                        *next.entry(key2).or_insert(ZERO) += w;
                    }
                }
                poly = next;
            }
            let fact: f64 = (1..=nl).map(|x| x as f64).product();
            for v in poly.values_mut() {
                *v /= fact.sqrt();
            }
        }
        for (key, amp) in poly {
            if key.iter().zip(dims).all(|(n, d)| n < d) {
                out[(flatten(&key, dims), col)] = amp;
            }
        }
    }
    Ok(out)
}

/// Extend orthonormal rows to a full unitary by Gram-Schmidt against the
/// standard basis.
pub fn complete_to_unitary(rows: &[Vec<C64>]) -> Result<CMatrix> {
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
    let candidates = rows.iter().cloned().chain((0..n).map(|j| {
        let mut e = vec![ZERO; n];
        e[j] = ONE;
        e
    }));
    for (idx, mut v) in candidates.enumerate() {
        if v.len() != n {
            return Err(Error::Validation("rows of unequal length".into()));
        }
        for _ in 0..2 {
            for b in &basis {
                let p: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= p * bi;
                }
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if idx < rows.len() {
            if norm < 1e-8 {
                return Err(Error::Validation(format!("row {idx} is linearly dependent")));
            }
        } else if norm < 1e-6 {
            continue;
        }
        basis.push(v.iter().map(|c| c / norm).collect());
        if basis.len() == n {
            break;
        }
    }
    Ok(CMatrix::from_fn(n, n, |r, c| basis[r][c]))
}

fn unflatten(mut j: usize, dims: &[usize]) -> Vec<usize> {
    let mut occ = vec![0; dims.len()];
    for (o, d) in occ.iter_mut().zip(dims).rev() {
        *o = j % d;
        j /= d;
    }
    occ
}

fn flatten(occ: &[usize], dims: &[usize]) -> usize {
    occ.iter().zip(dims).fold(0, |acc, (o, d)| acc * d + o)
}

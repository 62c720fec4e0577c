//! Reduced density matrices of one or two modes in a truncated Fock basis.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

/// Density matrix over `dims.len()` modes with the first mode most
/// significant: basis index `j = j_1·d_2 + j_2`.
#[derive(Clone, Debug)]
pub struct FockDensityMatrix {
    pub dims: Vec<usize>,
    pub matrix: CMatrix,
    /// `|Tr ρ − 1|` before normalization.
    pub trace_deviation: f64,
    /// Most negative eigenvalue before validation (0 if none computed).
    pub min_eigenvalue: f64,
    pub warnings: Vec<String>,
}

impl FockDensityMatrix {
    /// Hermitize, trace-normalize and validate a raw matrix.
    pub fn from_raw(dims: &[usize], raw: CMatrix) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || dims.len() > 2 {
            return Err(Error::Validation(format!("{} modes; one or two supported", dims.len())));
        }
        if raw.shape() != (n, n) {
            return Err(Error::Validation(format!("matrix shape {:?} vs dims {:?}", raw.shape(), dims)));
        }
        let h = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
        let tr = h.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        let mut warnings = Vec::new();
        let trace_deviation = (tr - 1.0).abs();
        if trace_deviation > 1e-6 {
            warnings.push(format!("trace deviates from 1 by {trace_deviation:.3e} before normalization"));
        }
        let matrix = h / C64::new(tr, 0.0);
        let (w, _) = linalg::eigh(&matrix)?;
        let min_eigenvalue = w.first().copied().unwrap_or(0.0).min(0.0);
        if min_eigenvalue < -1e-6 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eigenvalue:.3e}")));
        }
        Ok(FockDensityMatrix { dims: dims.to_vec(), matrix, trace_deviation, min_eigenvalue, warnings })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn from_pure(dims: &[usize], psi: &[C64]) -> Result<Self> {
        let v = CMatrix::from_column_slice(psi.len(), 1, psi);
        Self::from_raw(dims, &v * v.adjoint())
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::eigh(&self.matrix)?.0)
    }

    /// `⟨n̂⟩` of mode `k`.
    pub fn mean_photons(&self, mode: usize) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            let occ = if self.dims.len() == 1 {
                j
            } else if mode == 0 {
                j / self.dims[1]
            } else {
                j % self.dims[1]
            };
            acc += occ as f64 * self.matrix[(j, j)].re;
        }
        acc
    }

    /// Reduced state of mode `keep` (0 or 1) of a two-mode matrix.
    pub fn partial_trace(&self, keep: usize) -> Result<FockDensityMatrix> {
        if self.dims.len() != 2 || keep > 1 {
            return Err(Error::Validation("partial trace needs a two-mode matrix and keep ∈ {0,1}".into()));
        }
        let (da, db) = (self.dims[0], self.dims[1]);
        let d = self.dims[keep];
        let mut out = CMatrix::zeros(d, d);
        if keep == 0 {
            for i in 0..da {
                for ip in 0..da {
                    let mut s = ZERO;
                    for k in 0..db {
                        s += self.matrix[(i * db + k, ip * db + k)];
                    }
                    out[(i, ip)] = s;
                }
            }
        } else {
            for j in 0..db {
                for jp in 0..db {
                    let mut s = ZERO;
                    for k in 0..da {
                        s += self.matrix[(k * db + j, k * db + jp)];
                    }
                    out[(j, jp)] = s;
                }
            }
        }
        FockDensityMatrix::from_raw(&[d], out)
    }

    /// Restrict to smaller per-mode cutoffs, renormalizing. The discarded
    /// population is recorded as a warning when it exceeds 1e-6.
    pub fn restrict(&self, cutoffs: &[usize]) -> Result<FockDensityMatrix> {
        if cutoffs.len() != self.dims.len() || cutoffs.iter().zip(&self.dims).any(|(c, d)| *c == 0 || c > d) {
            return Err(Error::Validation(format!("cutoffs {:?} incompatible with dims {:?}", cutoffs, self.dims)));
        }
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&j| {
                if self.dims.len() == 1 {
                    j < cutoffs[0]
                } else {
                    j / self.dims[1] < cutoffs[0] && j % self.dims[1] < cutoffs[1]
                }
            })
            .collect();
        let sub = CMatrix::from_fn(keep.len(), keep.len(), |r, c| self.matrix[(keep[r], keep[c])]);
        let kept = sub.trace().re;
        let mut out = FockDensityMatrix::from_raw(cutoffs, sub)?;
        out.trace_deviation = out.trace_deviation.max(self.trace_deviation);
        if 1.0 - kept > 1e-6 {
            out.warnings.push(format!("cutoff restriction discarded population {:.3e}", 1.0 - kept));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> DensityMatrixJson {
        let n = self.dim();
        DensityMatrixJson {
            dims: self.dims.clone(),
            real: (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].re).collect()).collect(),
            imag: (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].im).collect()).collect(),
            trace_deviation: self.trace_deviation,
            purity: self.purity(),
            warnings: self.warnings.clone(),
        }
    }

    pub fn from_json(j: &DensityMatrixJson) -> Result<Self> {
        let n: usize = j.dims.iter().product();
        if j.real.len() != n || j.imag.len() != n || j.real.iter().chain(&j.imag).any(|row| row.len() != n) {
            return Err(Error::Format("density matrix arrays do not match dims".into()));
        }
        let m = CMatrix::from_fn(n, n, |r, c| C64::new(j.real[r][c], j.imag[r][c]));
        let mut rho = Self::from_raw(&j.dims, m)?;
        rho.trace_deviation = rho.trace_deviation.max(j.trace_deviation);
        Ok(rho)
    }
}

/// On-disk form: nested real and imaginary arrays plus metadata.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DensityMatrixJson {
    pub dims: Vec<usize>,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
    #[serde(default)]
    pub trace_deviation: f64,
    #[serde(default)]
    pub purity: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn pure_and_mixed_purity() {
        let psi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let rho = FockDensityMatrix::from_pure(&[2], &psi).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let d = 5;
        let mixed = FockDensityMatrix::from_raw(&[d], CMatrix::identity(d, d)).unwrap();
        assert!((mixed.purity() - 0.2).abs() < 1e-14);
        let ev: f64 = mixed.eigenvalues().unwrap().iter().map(|x| x * x).sum();
        assert!((ev - mixed.purity()).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let a = FockDensityMatrix::from_pure(&[3], &[C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO]).unwrap();
        let b = FockDensityMatrix::from_pure(&[2], &[ONE, ZERO]).unwrap();
        let prod = FockDensityMatrix::from_raw(&[3, 2], a.matrix.kronecker(&b.matrix)).unwrap();
        let back = prod.partial_trace(0).unwrap();
        assert!(linalg::max_abs_diff(&back.matrix, &a.matrix) < 1e-15);
        assert!((prod.partial_trace(1).unwrap().trace() - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut bell = vec![ZERO; 4];
        bell[0] = C64::new(s, 0.0);
        bell[3] = C64::new(s, 0.0);
        let rho = FockDensityMatrix::from_pure(&[2, 2], &bell).unwrap();
        let red = rho.partial_trace(1).unwrap();
        assert!(linalg::max_abs_diff(&red.matrix, &(CMatrix::identity(2, 2) * C64::new(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn rejects_negative_and_round_trips_json() {
        let bad = CMatrix::from_row_slice(2, 2, &[C64::new(1.2, 0.0), ZERO, ZERO, C64::new(-0.2, 0.0)]);
        assert!(matches!(FockDensityMatrix::from_raw(&[2], bad), Err(Error::InvalidState(_))));
        let rho = FockDensityMatrix::from_pure(&[2, 2], &[C64::new(0.5, 0.0), C64::new(0.5, 0.1), C64::new(0.0, -0.5), C64::new(0.4, 0.0)]).unwrap();
        let j = rho.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back = FockDensityMatrix::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(&back.matrix, &rho.matrix) < 1e-15);
    }
}

//! Matrix product states in Vidal canonical form.
//!
//! A state of `n` sites is stored as right-canonical site tensors
//! `B[m] = Γ[m] λ[m+1]` together with the bond vectors `λ[0..=n]`. The Γ
//! tensors of the Vidal form are recovered on demand by dividing out the
//! right bond weights. Keeping the B tensors lets the two-site update avoid
//! dividing by small singular values entirely.
//!
//! ```text
//!  λ[0]  Γ[0]  λ[1]  Γ[1]  λ[2]  …  λ[n-1]  Γ[n-1]  λ[n]
//!   [1] ──■──── ● ────■──── ● ──  …  ── ● ─────■──── [1]
//!         │           │                        │
//! ```
//!
//! Bond `k` sits between sites `k-1` and `k`; bonds `0` and `n` are trivial.

mod gate;
mod mpo;
pub mod snapshot;
mod tensor;

pub use gate::TwoSiteGate;
pub use mpo::{charge_mpo, number_mpo, total_number_mpo, LocalMPO, Tensor4};
pub use tensor::Tensor3;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fock;
use crate::linalg::{self, CMatrix, ONE, ZERO};

/// Singular values below this are treated as exact zeros when dividing.
pub const LAMBDA_FLOOR: f64 = 1e-14;

/// Default limit on `Π d_m` for conversions to dense vectors.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    /// `None` means unbounded.
    pub chi_max: Option<usize>,
    /// Relative cut: singular values below `trunc_tol · s_max` are discarded.
    pub trunc_tol: f64,
}

impl Truncation {
    pub fn new(chi_max: Option<usize>, trunc_tol: f64) -> Self {
        Truncation { chi_max, trunc_tol }
    }

    /// No bond cap, discarding only numerically zero singular values.
    pub fn exact() -> Self {
        Truncation { chi_max: None, trunc_tol: 1e-14 }
    }

    fn keep(&self, s: &[f64]) -> usize {
        let cap = self.chi_max.unwrap_or(usize::MAX).max(1);
        let smax = s.first().copied().unwrap_or(0.0);
        let mut k = 0;
        while k < s.len() && k < cap && s[k] > 0.0 && s[k] >= self.trunc_tol * smax {
            k += 1;
        }
        k.max(1)
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::exact()
    }
}

#[derive(Clone, Debug)]
pub struct VidalMPS {
    dims: Vec<usize>,
    b: Vec<Tensor3>,
    lambdas: Vec<Vec<f64>>,
    pub truncation: Truncation,
    cum_trunc_error: f64,
}

impl VidalMPS {
    /// Product state from per-site amplitude vectors (each normalized here).
    pub fn product(local_states: &[Vec<C64>], truncation: Truncation) -> Result<Self> {
        if local_states.is_empty() {
            return Err(Error::Validation("an MPS needs at least one site".into()));
        }
        let mut b = Vec::with_capacity(local_states.len());
        let mut dims = Vec::with_capacity(local_states.len());
        for (m, amps) in local_states.iter().enumerate() {
            let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if amps.is_empty() || norm == 0.0 || !norm.is_finite() {
                return Err(Error::Validation(format!("site {m} has an empty or zero local state")));
            }
            let mut t = Tensor3::zeros(1, amps.len(), 1);
            for (i, c) in amps.iter().enumerate() {
                t.data[i] = c / norm;
            }
            dims.push(amps.len());
            b.push(t);
        }
        let n = dims.len();
        Ok(VidalMPS { dims, b, lambdas: vec![vec![1.0]; n + 1], truncation, cum_trunc_error: 0.0 })
    }

    pub fn vacuum(dims: &[usize], truncation: Truncation) -> Result<Self> {
        let states: Vec<Vec<C64>> = dims
            .iter()
            .map(|&d| {
                let mut v = vec![ZERO; d];
                if d > 0 {
                    v[0] = ONE;
                }
                v
            })
            .collect();
        Self::product(&states, truncation)
    }

    /// Fock product state `|n_1, n_2, …⟩`.
    pub fn fock(dims: &[usize], occupations: &[usize], truncation: Truncation) -> Result<Self> {
        if dims.len() != occupations.len() {
            return Err(Error::Validation("occupation list length differs from site count".into()));
        }
        let mut states = Vec::new();
        for (m, (&d, &n)) in dims.iter().zip(occupations).enumerate() {
            if n >= d {
                return Err(Error::Capacity { site: m, msg: format!("occupation {n} needs cutoff > {d}") });
            }
            let mut v = vec![ZERO; d];
            v[n] = ONE;
            states.push(v);
        }
        Self::product(&states, truncation)
    }

    /// Decompose a dense state vector (site 0 most significant) by sequential SVDs.
    pub fn from_dense(dims: &[usize], psi: &[C64], truncation: Truncation) -> Result<Self> {
        let total: usize = dims.iter().product();
        if psi.len() != total || dims.is_empty() {
            return Err(Error::Validation(format!(
                "dense vector of length {} does not match dims {:?}",
                psi.len(),
                dims
            )));
        }
        let n = dims.len();
        let mut tensors = Vec::with_capacity(n);
        // rest: rows = left bond, cols = remaining physical indices
        let mut rest = CMatrix::from_row_slice(1, total, psi);
        let mut left = 1;
        for m in 0..n - 1 {
            let d = dims[m];
            let cols = rest.ncols() / d;
            // regroup (left, i | rest') row-major
            let mut mat = CMatrix::zeros(left * d, cols);
            for a in 0..left {
                for i in 0..d {
                    for c in 0..cols {
                        mat[(a * d + i, c)] = rest[(a, i * cols + c)];
                    }
                }
            }
            let svd = linalg::svd(&mat)?;
            let k = svd.s.iter().take_while(|&&s| s > LAMBDA_FLOOR * svd.s[0]).count().max(1);
            let u = svd.u.columns(0, k).into_owned();
            tensors.push(Tensor3::from_left_matrix(&u, left, d));
            let mut sv = svd.vt.rows(0, k).into_owned();
            for r in 0..k {
                for x in sv.row_mut(r).iter_mut() {
                    *x *= svd.s[r];
                }
            }
            rest = sv;
            left = k;
        }
        tensors.push(Tensor3::from_right_matrix(&rest, dims[n - 1], 1));
        let mut mps = VidalMPS {
            dims: dims.to_vec(),
            b: tensors,
            lambdas: vec![vec![1.0]; n + 1],
            truncation,
            cum_trunc_error: 0.0,
        };
        mps.canonicalize()?;
        Ok(mps)
    }

    /// Random state with the given bond dimension, brought to canonical form.
    pub fn random<R: Rng>(dims: &[usize], chi: usize, rng: &mut R, truncation: Truncation) -> Result<Self> {
        let n = dims.len();
        if n == 0 {
            return Err(Error::Validation("an MPS needs at least one site".into()));
        }
        let mut b = Vec::with_capacity(n);
        for m in 0..n {
            let l = if m == 0 { 1 } else { chi };
            let r = if m == n - 1 { 1 } else { chi };
            let mut t = Tensor3::zeros(l, dims[m], r);
            for x in &mut t.data {
                *x = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
            b.push(t);
        }
        let mut mps = VidalMPS {
            dims: dims.to_vec(),
            b,
            lambdas: vec![vec![1.0]; n + 1],
            truncation,
            cum_trunc_error: 0.0,
        };
        mps.canonicalize()?;
        mps.cum_trunc_error = 0.0;
        Ok(mps)
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lambda(&self, bond: usize) -> &[f64] {
        &self.lambdas[bond]
    }

    pub fn lambdas(&self) -> &[Vec<f64>] {
        &self.lambdas
    }

    /// Right-canonical site tensor `Γ[m] λ[m+1]`.
    pub fn b_tensor(&self, m: usize) -> &Tensor3 {
        &self.b[m]
    }

    pub fn cum_trunc_error(&self) -> f64 {
        self.cum_trunc_error
    }

    pub fn add_trunc_error(&mut self, w: f64) {
        self.cum_trunc_error += w;
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.lambdas.iter().map(|l| l.len()).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.lambdas.iter().map(|l| l.len()).max().unwrap_or(1)
    }

    /// Vidal Γ tensor of site `m`; weights below [`LAMBDA_FLOOR`] divide to zero.
    pub fn gamma(&self, m: usize) -> Tensor3 {
        let mut g = self.b[m].clone();
        let lam = &self.lambdas[m + 1];
        for a in 0..g.left {
            for i in 0..g.phys {
                for r in 0..g.right {
                    let inv = if lam[r] < LAMBDA_FLOOR { 0.0 } else { 1.0 / lam[r] };
                    let k = g.idx(a, i, r);
                    g.data[k] *= inv;
                }
            }
        }
        g
    }

    /// Rebuild from Vidal data. Used by the snapshot reader.
    pub fn from_vidal(
        gammas: Vec<Tensor3>,
        lambdas: Vec<Vec<f64>>,
        truncation: Truncation,
        cum_trunc_error: f64,
    ) -> Result<Self> {
        let n = gammas.len();
        if n == 0 || lambdas.len() != n + 1 {
            return Err(Error::Format("inconsistent site/bond counts".into()));
        }
        let mut b = Vec::with_capacity(n);
        let mut dims = Vec::with_capacity(n);
        for (m, g) in gammas.into_iter().enumerate() {
            if g.left != lambdas[m].len() || g.right != lambdas[m + 1].len() {
                return Err(Error::Format(format!("site {m} tensor does not match bond dimensions")));
            }
            let mut t = g;
            let lam = &lambdas[m + 1];
            for a in 0..t.left {
                for i in 0..t.phys {
                    for r in 0..t.right {
                        let k = t.idx(a, i, r);
                        t.data[k] *= lam[r];
                    }
                }
            }
            dims.push(t.phys);
            b.push(t);
        }
        Ok(VidalMPS { dims, b, lambdas, truncation, cum_trunc_error })
    }

    fn check_site(&self, m: usize) -> Result<()> {
        if m >= self.n_sites() {
            return Err(Error::Validation(format!("site {m} out of range for {} sites", self.n_sites())));
        }
        Ok(())
    }

    /// Apply a unitary on a single site. Canonical form is preserved exactly.
    pub fn apply_one_site_gate(&mut self, m: usize, u: &CMatrix) -> Result<()> {
        self.check_site(m)?;
        let d = self.dims[m];
        if u.shape() != (d, d) {
            return Err(Error::Validation(format!("one-site gate shape {:?} vs local dim {d}", u.shape())));
        }
        let defect = linalg::unitarity_defect(u);
        if defect > 1e-8 {
            return Err(Error::Validation(format!("one-site gate is not unitary (defect {defect:.2e})")));
        }
        self.b[m] = self.b[m].apply_physical(u);
        Ok(())
    }

    /// Apply an arbitrary single-site operator without restoring canonical
    /// form. Callers must follow up with [`VidalMPS::canonicalize`].
    pub fn apply_local_operator_raw(&mut self, m: usize, op: &CMatrix) -> Result<()> {
        self.check_site(m)?;
        if op.shape() != (self.dims[m], self.dims[m]) {
            return Err(Error::Validation("local operator shape mismatch".into()));
        }
        self.b[m] = self.b[m].apply_physical(op);
        Ok(())
    }

    /// Apply a two-site gate on sites `(m, m+1)`, truncate, renormalize.
    /// Returns the discarded weight `Σ s_k²` over dropped singular values.
    pub fn apply_two_site_gate(&mut self, m: usize, gate: &TwoSiteGate) -> Result<f64> {
        if m + 1 >= self.n_sites() {
            return Err(Error::Validation(format!("two-site gate at {m} needs site {}", m + 1)));
        }
        let (d1, d2) = (self.dims[m], self.dims[m + 1]);
        if gate.d_left != d1 || gate.d_right != d2 {
            return Err(Error::Validation(format!(
                "gate dims ({}, {}) do not match sites {m},{} with dims ({d1}, {d2})",
                gate.d_left,
                gate.d_right,
                m + 1
            )));
        }
        let (o1, o2) = (gate.out_left, gate.out_right);
        let b1 = &self.b[m];
        let b2 = &self.b[m + 1];
        let (chi_l, chi_r) = (b1.left, b2.right);

        // Φ0[(a,i),(j,b)] = Σ_c B1[a,i,c] B2[c,j,b]
        let phi0 = b1.to_left_matrix() * b2.to_right_matrix();

        // Regroup to rows (i,j), cols (a,b) and apply the gate.
        let pair_in = d1 * d2;
        let mut x = CMatrix::zeros(pair_in, chi_l * chi_r);
        for a in 0..chi_l {
            for i in 0..d1 {
                for j in 0..d2 {
                    for bb in 0..chi_r {
                        x[(i * d2 + j, a * chi_r + bb)] = phi0[(a * d1 + i, j * chi_r + bb)];
                    }
                }
            }
        }
        let y = gate.apply_to(&x);
        let mut phi = CMatrix::zeros(chi_l * o1, o2 * chi_r);
        for a in 0..chi_l {
            for i in 0..o1 {
                for j in 0..o2 {
                    for bb in 0..chi_r {
                        phi[(a * o1 + i, j * chi_r + bb)] = y[(i * o2 + j, a * chi_r + bb)];
                    }
                }
            }
        }

        // Θ = diag(λ_left) Φ
        let lam_l = &self.lambdas[m];
        let mut theta = phi.clone();
        for a in 0..chi_l {
            for i in 0..o1 {
                let r = a * o1 + i;
                for x in theta.row_mut(r).iter_mut() {
                    *x *= lam_l[a];
                }
            }
        }
        let svd = linalg::svd(&theta).map_err(|e| match e {
            Error::Numerical { msg, .. } => Error::Numerical { site: m, msg },
            other => other,
        })?;
        let k = self.truncation.keep(&svd.s);
        let kept: f64 = svd.s[..k].iter().map(|s| s * s).sum();
        let weight: f64 = svd.s[k..].iter().map(|s| s * s).sum();
        if kept <= 0.0 || !kept.is_finite() {
            return Err(Error::Numerical { site: m, msg: "state collapsed to zero norm".into() });
        }
        let norm = kept.sqrt();

        let vt = svd.vt.rows(0, k).into_owned();
        let new_b2 = Tensor3::from_right_matrix(&vt, o2, chi_r);
        let mut new_b1_mat = &phi * vt.adjoint();
        new_b1_mat /= C64::new(norm, 0.0);
        let new_b1 = Tensor3::from_left_matrix(&new_b1_mat, chi_l, o1);

        self.lambdas[m + 1] = svd.s[..k].iter().map(|s| s / norm).collect();
        self.b[m] = new_b1;
        self.b[m + 1] = new_b2;
        self.dims[m] = o1;
        self.dims[m + 1] = o2;
        self.cum_trunc_error += weight;
        Ok(weight)
    }

    /// Restore canonical form after non-unitary local operations: a QR sweep
    /// left to right, then an SVD sweep right to left that sets the bond
    /// weights. Returns the squared norm found before renormalization.
    pub fn canonicalize(&mut self) -> Result<f64> {
        let n = self.n_sites();
        for m in 0..n - 1 {
            let t = &self.b[m];
            let mat = t.to_left_matrix();
            let (left, phys) = (t.left, t.phys);
            let qr = mat.qr();
            let q = qr.q();
            let r = qr.r();
            self.b[m] = Tensor3::from_left_matrix(&q, left, phys);
            let next = &self.b[m + 1];
            let merged = r * next.to_right_matrix();
            self.b[m + 1] = Tensor3::from_right_matrix(&merged, next.phys, next.right);
        }
        let mut weight = 0.0;
        for m in (1..n).rev() {
            let t = &self.b[m];
            let (phys, right) = (t.phys, t.right);
            let svd = linalg::svd(&t.to_right_matrix()).map_err(|e| match e {
                Error::Numerical { msg, .. } => Error::Numerical { site: m, msg },
                other => other,
            })?;
            let total: f64 = svd.s.iter().map(|s| s * s).sum();
            if total <= 0.0 || !total.is_finite() {
                return Err(Error::Numerical { site: m, msg: "zero-norm state in canonicalization".into() });
            }
            let k = self.truncation.keep(&svd.s);
            let kept: f64 = svd.s[..k].iter().map(|s| s * s).sum();
            weight += (total - kept) / total;
            let vt = svd.vt.rows(0, k).into_owned();
            self.b[m] = Tensor3::from_right_matrix(&vt, phys, right);
            let norm = kept.sqrt();
            self.lambdas[m] = svd.s[..k].iter().map(|s| s / norm).collect();
            let mut us = svd.u.columns(0, k).into_owned();
            for c in 0..k {
                for x in us.column_mut(c).iter_mut() {
                    *x *= svd.s[c];
                }
            }
            let prev = &self.b[m - 1];
            let merged = prev.to_left_matrix() * us;
            self.b[m - 1] = Tensor3::from_left_matrix(&merged, prev.left, prev.phys);
        }
        let norm_sq = self.b[0].norm_sqr();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::Numerical { site: 0, msg: "zero-norm state in canonicalization".into() });
        }
        self.b[0].scale(1.0 / norm_sq.sqrt());
        self.lambdas[0] = vec![1.0];
        self.lambdas[n] = vec![1.0];
        self.cum_trunc_error += weight;
        Ok(norm_sq)
    }

    /// `⟨O_m⟩` for a single-site operator, using the canonical form.
    pub fn local_expectation(&self, m: usize, op: &CMatrix) -> Result<C64> {
        self.check_site(m)?;
        let t = &self.b[m];
        if op.shape() != (t.phys, t.phys) {
            return Err(Error::Validation("local operator shape mismatch".into()));
        }
        let ot = t.apply_physical(op);
        let lam = &self.lambdas[m];
        let mut acc = ZERO;
        for a in 0..t.left {
            let w = lam[a] * lam[a];
            let mut s = ZERO;
            let base = a * t.phys * t.right;
            for k in 0..t.phys * t.right {
                s += t.data[base + k].conj() * ot.data[base + k];
            }
            acc += s * w;
        }
        Ok(acc)
    }

    pub fn local_number(&self, m: usize) -> f64 {
        let t = &self.b[m];
        let lam = &self.lambdas[m];
        let mut acc = 0.0;
        for a in 0..t.left {
            let w = lam[a] * lam[a];
            for i in 1..t.phys {
                for r in 0..t.right {
                    acc += w * i as f64 * t.get(a, i, r).norm_sqr();
                }
            }
        }
        acc
    }

    /// `⟨n̂_m⟩ / Δz` for every site.
    pub fn photon_density(&self, dz: f64) -> Vec<f64> {
        (0..self.n_sites()).map(|m| self.local_number(m) / dz).collect()
    }

    pub fn total_photon_number(&self) -> f64 {
        (0..self.n_sites()).map(|m| self.local_number(m)).sum()
    }

    /// `⟨a†_ℓ a†_m a_m a_ℓ⟩ / (⟨n̂_ℓ⟩⟨n̂_m⟩)`.
    pub fn g2(&self, l: usize, m: usize) -> Result<f64> {
        self.check_site(l)?;
        self.check_site(m)?;
        let nl = self.local_number(l);
        let nm = self.local_number(m);
        if nl * nm <= 1e-300 {
            return Err(Error::Undefined(format!("g2({l},{m}) with vanishing occupation")));
        }
        let num = if l == m {
            let d = self.dims[l];
            self.local_expectation(l, &fock::diagonal(d, |n| (n * n.saturating_sub(1)) as f64))?.re
        } else {
            let mut ops: Vec<Option<CMatrix>> = vec![None; self.n_sites()];
            ops[l] = Some(fock::number(self.dims[l]));
            ops[m] = Some(fock::number(self.dims[m]));
            self.expect_mpo(&LocalMPO::product(&self.dims, ops)?)?.re
        };
        Ok(num / (nl * nm))
    }

    /// `⟨Ψ|O|Ψ⟩` by left-to-right contraction. Makes no use of canonical form.
    pub fn expect_mpo(&self, op: &LocalMPO) -> Result<C64> {
        if op.n_sites() != self.n_sites() {
            return Err(Error::Validation("MPO and MPS have different lengths".into()));
        }
        // env[(bra a, w, ket a')]
        let mut env = vec![ONE];
        let (mut chi, mut w) = (1usize, 1usize);
        for m in 0..self.n_sites() {
            let t = &self.b[m];
            let o = &op.tensors[m];
            if o.d != t.phys || o.left != w || t.left != chi {
                return Err(Error::Validation(format!("MPO dimension mismatch at site {m}")));
            }
            let (d, r, wr) = (t.phys, t.right, o.right);
            // t1[w, a', i, b] = Σ_a env[a,w,a'] conj(B[a,i,b])
            let mut t1 = vec![ZERO; w * chi * d * r];
            for a in 0..chi {
                for ww in 0..w {
                    for ap in 0..chi {
                        let e = env[(a * w + ww) * chi + ap];
                        if e == ZERO {
                            continue;
                        }
                        for i in 0..d {
                            let src = t.idx(a, i, 0);
                            let dst = ((ww * chi + ap) * d + i) * r;
                            for bb in 0..r {
                                t1[dst + bb] += e * t.data[src + bb].conj();
                            }
                        }
                    }
                }
            }
            // t2[a', i', b, w'] = Σ_{w,i} t1[w,a',i,b] O[w,i,i',w']
            let mut t2 = vec![ZERO; chi * d * r * wr];
            for ww in 0..w {
                for i in 0..d {
                    for ip in 0..d {
                        for wp in 0..wr {
                            let ov = o.get(ww, i, ip, wp);
                            if ov == ZERO {
                                continue;
                            }
                            for ap in 0..chi {
                                let src = ((ww * chi + ap) * d + i) * r;
                                for bb in 0..r {
                                    t2[((ap * d + ip) * r + bb) * wr + wp] += ov * t1[src + bb];
                                }
                            }
                        }
                    }
                }
            }
            // env'[b, w', b'] = Σ_{a',i'} t2[a',i',b,w'] B[a',i',b']
            let mut next = vec![ZERO; r * wr * r];
            for ap in 0..chi {
                for ip in 0..d {
                    for bb in 0..r {
                        for wp in 0..wr {
                            let v = t2[((ap * d + ip) * r + bb) * wr + wp];
                            if v == ZERO {
                                continue;
                            }
                            let src = t.idx(ap, ip, 0);
                            let dst = (bb * wr + wp) * r;
                            for bp in 0..r {
                                next[dst + bp] += v * t.data[src + bp];
                            }
                        }
                    }
                }
            }
            env = next;
            chi = r;
            w = wr;
        }
        if chi != 1 || w != 1 {
            return Err(Error::Validation("MPO right boundary is not trivial".into()));
        }
        Ok(env[0])
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &VidalMPS) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::Validation("overlap of states with different local dims".into()));
        }
        let mut env = CMatrix::from_element(1, 1, ONE);
        for m in 0..self.n_sites() {
            let (a, b) = (&self.b[m], &other.b[m]);
            let mut next = CMatrix::zeros(a.right, b.right);
            for i in 0..a.phys {
                let am = CMatrix::from_fn(a.left, a.right, |x, y| a.get(x, i, y));
                let bm = CMatrix::from_fn(b.left, b.right, |x, y| b.get(x, i, y));
                next += am.adjoint() * &env * bm;
            }
            env = next;
        }
        Ok(env[(0, 0)])
    }

    pub fn fidelity(&self, other: &VidalMPS) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    pub fn norm_squared(&self) -> f64 {
        self.overlap(self).map(|c| c.re).unwrap_or(f64::NAN)
    }

    /// Full coefficient vector with site 0 as the most significant index.
    pub fn to_dense_statevector(&self, limit: usize) -> Result<Vec<C64>> {
        let total: usize = self.dims.iter().product();
        if total > limit {
            return Err(Error::Validation(format!("dense dimension {total} exceeds limit {limit}")));
        }
        // psi[(prefix), bond]
        let mut psi = vec![ONE];
        let mut prefix = 1usize;
        let mut chi = 1usize;
        for t in &self.b {
            let (d, r) = (t.phys, t.right);
            let mut next = vec![ZERO; prefix * d * r];
            for p in 0..prefix {
                for a in 0..chi {
                    let c = psi[p * chi + a];
                    if c == ZERO {
                        continue;
                    }
                    for i in 0..d {
                        let src = t.idx(a, i, 0);
                        let dst = (p * d + i) * r;
                        for bb in 0..r {
                            next[dst + bb] += c * t.data[src + bb];
                        }
                    }
                }
            }
            psi = next;
            prefix *= d;
            chi = r;
        }
        Ok(psi)
    }

    /// Enlarge the local Fock space at site `m` by zero padding. Exact.
    pub fn pad_local_dim(&mut self, m: usize, new_d: usize) -> Result<()> {
        self.check_site(m)?;
        let t = &self.b[m];
        if new_d < t.phys {
            return Err(Error::Validation("padding cannot shrink a local space".into()));
        }
        let mut out = Tensor3::zeros(t.left, new_d, t.right);
        for a in 0..t.left {
            for i in 0..t.phys {
                for r in 0..t.right {
                    out.set(a, i, r, t.get(a, i, r));
                }
            }
        }
        self.b[m] = out;
        self.dims[m] = new_d;
        Ok(())
    }

    /// Largest violation of the canonical-form conditions: λ normalization
    /// and ordering, and the left/right isometry of `λΓ` and `Γλ`.
    pub fn canonical_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for lam in &self.lambdas {
            let s: f64 = lam.iter().map(|x| x * x).sum();
            worst = worst.max((s - 1.0).abs());
            for w in lam.windows(2) {
                if w[1] > w[0] + 1e-14 {
                    worst = worst.max(w[1] - w[0]);
                }
            }
        }
        for m in 0..self.n_sites() {
            let t = &self.b[m];
            // right isometry: Σ_{i,b} B[a,i,b] conj(B[a',i,b]) = δ
            let rm = t.to_right_matrix();
            let p = &rm * rm.adjoint();
            for x in 0..p.nrows() {
                for y in 0..p.ncols() {
                    let target = if x == y { 1.0 } else { 0.0 };
                    worst = worst.max((p[(x, y)] - C64::new(target, 0.0)).norm());
                }
            }
            // left isometry of λ[m] Γ[m]: Σ_{a,i} λ_a² Γ[a,i,b] conj(Γ[a,i,b']) = δ
            let g = self.gamma(m);
            let lam = &self.lambdas[m];
            let lam_r = &self.lambdas[m + 1];
            for b1 in 0..g.right {
                if lam_r[b1] < 1e-7 {
                    continue;
                }
                for b2 in 0..g.right {
                    if lam_r[b2] < 1e-7 {
                        continue;
                    }
                    let mut s = ZERO;
                    for a in 0..g.left {
                        for i in 0..g.phys {
                            s += g.get(a, i, b1) * g.get(a, i, b2).conj() * lam[a] * lam[a];
                        }
                    }
                    let target = if b1 == b2 { 1.0 } else { 0.0 };
                    worst = worst.max((s - C64::new(target, 0.0)).norm());
                }
            }
        }
        worst
    }
}

/// Coherent product state obtained by displacing the supermode `Σ f_m a_m` by
/// `alpha`: site `m` holds the coherent state with amplitude `conj(f_m)·alpha`.
///
/// The envelope must be normalized to 1e-10 and every site's truncated
/// coherent state must lose less than `max_deficit` norm.
pub fn init_coherent_mps(
    envelope: &[C64],
    alpha: C64,
    local_dims: &[usize],
    max_deficit: f64,
    truncation: Truncation,
) -> Result<VidalMPS> {
    if envelope.len() != local_dims.len() {
        return Err(Error::Validation(format!(
            "envelope has {} entries for {} sites",
            envelope.len(),
            local_dims.len()
        )));
    }
    let norm: f64 = envelope.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!("envelope is not normalized: Σ|f|² = {norm:.12}")));
    }
    let mut states = Vec::with_capacity(envelope.len());
    for (m, (f, &d)) in envelope.iter().zip(local_dims).enumerate() {
        let beta = f.conj() * alpha;
        let (amps, deficit) = fock::coherent_amplitudes(beta, d);
        if deficit > max_deficit {
            return Err(Error::Capacity {
                site: m,
                msg: format!(
                    "cutoff {d} leaves coherent-state norm deficit {deficit:.3e} (> {max_deficit:.1e}) at |β|²={:.4}",
                    beta.norm_sqr()
                ),
            });
        }
        states.push(amps);
    }
    VidalMPS::product(&states, truncation)
}

#[cfg(test)]
mod tests;

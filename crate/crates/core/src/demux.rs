//! Supermode demultiplexing: a cascade of nearest-neighbour beam splitters
//! that moves a set of orthonormal pulse envelopes onto the leftmost sites
//! of an MPS, after which their joint state is a small density matrix.
//!
//! Mode conventions (1-based `m` in the docs, 0-based in code). One
//! iteration `r` is parametrized by angles `θ_r..θ_N` and `φ_r..φ_{N−1}`;
//! the beam splitter on modes `(m, m+1)` acts in the Heisenberg picture as
//!
//! ```text
//! a_m     → e^{iθ} sinφ a_m     + cosφ a_{m+1}
//! a_{m+1} → e^{−iθ} sinφ a_{m+1} − cosφ a_m
//! ```
//!
//! and the last angle is a phase `a_N → e^{iθ_N} a_N`. The iteration's mode
//! matrix is `T^{(r)} = M_r M_{r+1} ⋯ M_N` and the accumulated mixing matrix
//! is `c^{(r)} = T^{(r)} c^{(r−1)}`, with row `r` equal to the target
//! envelope `f^{(r)}`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

use crate::density::FockDensityMatrix;
use crate::error::{Error, Result};
use crate::fock;
use crate::linalg::{self, CMatrix, I, ONE, ZERO};
use crate::mps::{LocalMPO, Tensor3, TwoSiteGate, VidalMPS};

const ORTHONORMAL_TOL: f64 = 1e-10;
const PIVOT_FLOOR: f64 = 1e-10;
const EXHAUSTED: f64 = 1e-9;

/// Orthonormal target envelopes `f^{(1)}, …, f^{(s)}` over `n` modes.
#[derive(Clone, Debug)]
pub struct SupermodeBasis {
    n: usize,
    modes: Vec<Vec<C64>>,
}

impl SupermodeBasis {
    pub fn new(modes: Vec<Vec<C64>>) -> Result<Self> {
        let n = modes.first().map(|f| f.len()).unwrap_or(0);
        if modes.is_empty() || n == 0 {
            return Err(Error::Validation("at least one non-empty supermode is required".into()));
        }
        if modes.len() > n {
            return Err(Error::Validation(format!("{} supermodes over {n} modes", modes.len())));
        }
        for (i, f) in modes.iter().enumerate() {
            if f.len() != n {
                return Err(Error::Validation(format!("supermode {i} has length {} instead of {n}", f.len())));
            }
            for (j, g) in modes.iter().enumerate().take(i + 1) {
                let ip: C64 = g.iter().zip(f).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { ONE } else { ZERO };
                if (ip - want).norm() > ORTHONORMAL_TOL {
                    return Err(Error::Validation(format!(
                        "supermodes {j} and {i} are not orthonormal: ⟨f{j}|f{i}⟩ = {ip:.3e}"
                    )));
                }
            }
        }
        Ok(SupermodeBasis { n, modes })
    }

    /// Embed FH and SH envelopes on the interleaved χ² layout
    /// `a_1, b_1, a_2, b_2, …`: the FH supermode comes first, the SH second.
    pub fn interleaved(fh: &[C64], sh: &[C64]) -> Result<Self> {
        if fh.len() != sh.len() {
            return Err(Error::Validation("FH and SH envelopes differ in length".into()));
        }
        let n = fh.len();
        let mut a = vec![ZERO; 2 * n];
        let mut b = vec![ZERO; 2 * n];
        for m in 0..n {
            a[2 * m] = fh[m];
            b[2 * m + 1] = sh[m];
        }
        Self::new(vec![a, b])
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn n_supermodes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, r: usize) -> &[C64] {
        &self.modes[r]
    }
}

/// Angles of one iteration; `theta[k]` and `phi[k]` belong to mode `r + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationAngles {
    /// 0-based iteration index; the iteration acts on modes `r..n`.
    pub r: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DemuxPlan {
    pub n: usize,
    pub iterations: Vec<IterationAngles>,
    /// Accumulated mode matrix `c^{(s)}`.
    pub mixing: CMatrix,
    /// Largest `|c^{(r)}_{r,·} − f^{(r)}|` over the iterations.
    pub residual: f64,
}

impl DemuxPlan {
    pub fn n_supermodes(&self) -> usize {
        self.iterations.len()
    }

    /// Plain-text listing, one line per angle.
    pub fn describe(&self) -> String {
        let mut out = format!("# demux plan: {} modes, {} supermodes\n", self.n, self.iterations.len());
        out.push_str("iteration,mode,theta,phi\n");
        for it in &self.iterations {
            for (k, th) in it.theta.iter().enumerate() {
                let phi = it.phi.get(k).map(|p| format!("{p:.17e}")).unwrap_or_default();
                out.push_str(&format!("{},{},{th:.17e},{phi}\n", it.r + 1, it.r + k + 1));
            }
        }
        out
    }
}

/// Heisenberg matrix of one beam splitter, applied as a right multiplication
/// `T ← T·M_m` on columns `m, m+1`.
fn right_multiply(t: &mut CMatrix, m: usize, theta: f64, phi: Option<f64>) {
    match phi {
        None => {
            let e = C64::from_polar(1.0, theta);
            for i in 0..t.nrows() {
                t[(i, m)] *= e;
            }
        }
        Some(phi) => {
            let (s, c) = phi.sin_cos();
            let ep = C64::from_polar(s, theta);
            let em = C64::from_polar(s, -theta);
            for i in 0..t.nrows() {
                let (x, y) = (t[(i, m)], t[(i, m + 1)]);
                t[(i, m)] = x * ep - y * c;
                t[(i, m + 1)] = x * c + y * em;
            }
        }
    }
}

/// `T^{(r)} = M_r ⋯ M_N` for one iteration.
pub fn iteration_matrix(n: usize, it: &IterationAngles) -> CMatrix {
    let mut t = CMatrix::identity(n, n);
    for (k, &th) in it.theta.iter().enumerate() {
        let m = it.r + k;
        let phi = if m + 1 < n { Some(it.phi[k]) } else { None };
        right_multiply(&mut t, m, th, phi);
    }
    t
}

/// Solve the angles of every iteration, proceeding `m = r…N` within each.
///
/// With `prod = Π_{k<m} cos φ_k`, each step computes
/// `I_m = (f_{m−r+1} − Σ_{k<m} g_k c^{(r−1)}_{k,m−r+1}) / (c^{(r−1)}_{m,m−r+1} · prod)`
/// and sets `θ_m = arg I_m`, `φ_m = asin |I_m|`, `g_m = e^{iθ_m} sin φ_m · prod`.
/// When the pivot `c^{(r−1)}_{m,m−r+1}` vanishes the coefficient is taken from
/// the projection `⟨c^{(r−1)}_m|f⟩` instead. Once `prod` is exhausted the
/// remaining splitters are set to the identity (`θ = 0`, `φ = π/2`).
pub fn solve_demux_angles(basis: &SupermodeBasis) -> Result<DemuxPlan> {
    let n = basis.n_modes();
    let mut c = CMatrix::identity(n, n);
    let mut iterations = Vec::with_capacity(basis.n_supermodes());
    let mut residual: f64 = 0.0;
    for r in 0..basis.n_supermodes() {
        let f = basis.mode(r);
        let mut theta = Vec::with_capacity(n - r);
        let mut phi = Vec::with_capacity(n - r);
        let mut g = vec![ZERO; n];
        let mut prod = 1.0;
        for m in r..n {
            let last = m + 1 == n;
            if prod < EXHAUSTED {
                let rem = remaining_weight(f, &g, &c, r, m);
                if rem > 1e-6 {
                    return Err(Error::Degeneracy {
                        iteration: r + 1,
                        bin: m + 1,
                        msg: format!("beam-splitter chain exhausted with target weight {rem:.3e} left"),
                    });
                }
                theta.push(0.0);
                if !last {
                    phi.push(FRAC_PI_2);
                }
                continue;
            }
            let ell = m - r;
            let pivot = c[(m, ell)];
            let gm = if pivot.norm() > PIVOT_FLOOR {
                let mut num = f[ell];
                for k in r..m {
                    num -= g[k] * c[(k, ell)];
                }
                num / pivot
            } else {
                (0..n).map(|l| c[(m, l)].conj() * f[l]).sum()
            };
            let i_m = gm / prod;
            let mag = i_m.norm();
            let th = if mag > 0.0 { i_m.arg() } else { 0.0 };
            if last {
                if (mag - 1.0).abs() > 1e-6 {
                    return Err(Error::Inconsistency {
                        iteration: r + 1,
                        bin: m + 1,
                        msg: format!("closing phase has |I| = {mag:.9}"),
                    });
                }
                g[m] = C64::from_polar(prod, th);
                theta.push(th);
            } else {
                if mag > 1.0 + 1e-6 {
                    return Err(Error::Inconsistency {
                        iteration: r + 1,
                        bin: m + 1,
                        msg: format!("|I| = {mag:.9} exceeds 1"),
                    });
                }
                // φ from the weight still to be placed rather than
                // acos(|I|), which loses all precision as |I| → 1.
                g[m] = gm;
                let rest = remaining_weight(f, &g, &c, r, m + 1);
                let p = gm.norm().atan2(rest);
                g[m] = C64::from_polar(p.sin() * prod, th);
                theta.push(th);
                phi.push(p);
                prod *= p.cos();
            }
        }
        let it = IterationAngles { r, theta, phi };
        c = iteration_matrix(n, &it) * c;
        let dev = (0..n).map(|l| (c[(r, l)] - f[l]).norm_sqr()).sum::<f64>().sqrt();
        if dev > 1e-6 {
            return Err(Error::Inconsistency {
                iteration: r + 1,
                bin: r + 1,
                msg: format!("row {} of the mixing matrix misses its target by {dev:.3e}", r + 1),
            });
        }
        residual = residual.max(dev);
        iterations.push(it);
    }
    Ok(DemuxPlan { n, iterations, mixing: c, residual })
}

fn remaining_weight(f: &[C64], g: &[C64], c: &CMatrix, r: usize, m: usize) -> f64 {
    (0..f.len())
        .map(|l| {
            let mut v = f[l];
            for k in r..m {
                v -= g[k] * c[(k, l)];
            }
            v.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Rebuild `c^{(s)}` from the angles alone and check its structure: rows
/// `1..s` reproduce the targets, it is unitary, and row `m` has no weight
/// on columns `ℓ < m − s`.
pub fn reconstruct_mixing_matrix(plan: &DemuxPlan, basis: &SupermodeBasis) -> Result<CMatrix> {
    let n = plan.n;
    let mut c = CMatrix::identity(n, n);
    for it in &plan.iterations {
        c = iteration_matrix(n, it) * c;
    }
    let s = plan.iterations.len();
    for r in 0..s {
        let dev = (0..n).map(|l| (c[(r, l)] - basis.mode(r)[l]).norm_sqr()).sum::<f64>().sqrt();
        if dev > 1e-8 {
            return Err(Error::Inconsistency { iteration: r + 1, bin: r + 1, msg: format!("row deviates by {dev:.3e}") });
        }
    }
    if linalg::unitarity_defect(&c) > 1e-10 {
        return Err(Error::Numerical { site: 0, msg: "mixing matrix is not unitary".into() });
    }
    for m in 0..n {
        for l in 0..m.saturating_sub(s) {
            if c[(m, l)].norm() > 1e-10 {
                return Err(Error::Inconsistency {
                    iteration: s,
                    bin: m + 1,
                    msg: format!("band violated at column {}", l + 1),
                });
            }
        }
    }
    Ok(c)
}

/// Beam splitter `exp[iθ(n_m − n_{m+1})] · exp[(π/2 − φ)(e^{−iθ} a_m† a_{m+1} − e^{iθ} a_m a_{m+1}†)]`
/// on two modes of cutoff `d`.
pub fn beam_splitter_gate(theta: f64, phi: f64, d: usize) -> Result<TwoSiteGate> {
    let a = fock::annihilation(d);
    let ad = a.adjoint();
    let gen = linalg::kron(&ad, &a) * C64::from_polar(1.0, -theta) - linalg::kron(&a, &ad) * C64::from_polar(1.0, theta);
    // exp(x·G) = exp(i·H) with H = −i x G Hermitian.
    let h = gen * (-I * (FRAC_PI_2 - phi));
    // The generator conserves n_m + n_{m+1}; exponentiate each block.
    let mut mix = CMatrix::zeros(d * d, d * d);
    for total in 0..(2 * d - 1) {
        let idx: Vec<usize> = (0..d)
            .filter(|&na| total >= na && total - na < d)
            .map(|na| na * d + (total - na))
            .collect();
        let sub = CMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
        let u = linalg::exp_i_hermitian(&sub, 1.0)?;
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                mix[(i, j)] = u[(r, c)];
            }
        }
    }
    for (r, mut row) in mix.row_iter_mut().enumerate() {
        row *= C64::from_polar(1.0, theta * ((r / d) as f64 - (r % d) as f64));
    }
    TwoSiteGate::new(d, d, mix)?.with_number_blocks()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DemuxOptions {
    /// Local dimension every site is padded to before the cascade. `None`
    /// keeps the largest current local dimension.
    pub cutoff: Option<usize>,
}

/// Apply `V = V^{(s)} ⋯ V^{(1)}` with `V^{(r)} = R_r ⋯ R_N` (so `R_N` acts
/// first) in place. Returns the summed truncation weight.
pub fn apply_demux(state: &mut VidalMPS, plan: &DemuxPlan, opts: DemuxOptions) -> Result<f64> {
    if state.n_sites() != plan.n {
        return Err(Error::Validation(format!("plan for {} modes, state has {} sites", plan.n, state.n_sites())));
    }
    let d = opts.cutoff.unwrap_or(0).max(state.local_dims().iter().copied().max().unwrap_or(1));
    for m in 0..state.n_sites() {
        if state.local_dims()[m] < d {
            state.pad_local_dim(m, d)?;
        }
    }
    let n = plan.n;
    let mut weight = 0.0;
    for it in &plan.iterations {
        for k in (0..it.theta.len()).rev() {
            let m = it.r + k;
            if m + 1 == n {
                let ph = fock::phase_diagonal(d, |q| it.theta[k] * q as f64);
                state.apply_one_site_gate(m, &ph)?;
            } else {
                let g = beam_splitter_gate(it.theta[k], it.phi[k], d)?;
                weight += state.apply_two_site_gate(m, &g)?;
            }
        }
    }
    Ok(weight)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RdmMethod {
    /// Contract the leftmost sites directly; the right-canonical tail is an
    /// identity environment.
    #[default]
    Contraction,
    /// One projector MPO expectation per matrix element.
    ProjectorMpo,
}

/// Joint state of the leftmost `s ∈ {1, 2}` sites, optionally restricted to
/// smaller per-mode cutoffs.
pub fn reduced_density_matrix(
    state: &VidalMPS,
    s: usize,
    cutoffs: Option<&[usize]>,
    method: RdmMethod,
) -> Result<FockDensityMatrix> {
    if s == 0 || s > 2 || s > state.n_sites() {
        return Err(Error::Validation(format!("reduced state of {s} sites not supported")));
    }
    let dims: Vec<usize> = state.local_dims()[..s].to_vec();
    let raw = match method {
        RdmMethod::Contraction => contract_left(state, s),
        RdmMethod::ProjectorMpo => projector_rdm(state, &dims)?,
    };
    let rho = FockDensityMatrix::from_raw(&dims, raw)?;
    match cutoffs {
        Some(c) if c != dims.as_slice() => rho.restrict(c),
        _ => Ok(rho),
    }
}

fn contract_left(state: &VidalMPS, s: usize) -> CMatrix {
    let b0: &Tensor3 = state.b_tensor(0);
    // rows: physical multi-index, columns: right bond
    let mut x = CMatrix::from_fn(b0.phys, b0.right, |j, b| b0.get(0, j, b));
    for m in 1..s {
        let bm = state.b_tensor(m);
        let mut next = CMatrix::zeros(x.nrows() * bm.phys, bm.right);
        for j in 0..x.nrows() {
            for a in 0..bm.left {
                let xa = x[(j, a)];
                if xa == ZERO {
                    continue;
                }
                for i in 0..bm.phys {
                    for b in 0..bm.right {
                        next[(j * bm.phys + i, b)] += xa * bm.get(a, i, b);
                    }
                }
            }
        }
        x = next;
    }
    &x * x.adjoint()
}

fn projector_rdm(state: &VidalMPS, dims: &[usize]) -> Result<CMatrix> {
    let n: usize = dims.iter().product();
    let all = state.local_dims().to_vec();
    let digits = |j: usize| -> Vec<usize> {
        if dims.len() == 1 {
            vec![j]
        } else {
            vec![j / dims[1], j % dims[1]]
        }
    };
    let mut rho = CMatrix::zeros(n, n);
    for j in 0..n {
        for jp in 0..n {
            let (dj, djp) = (digits(j), digits(jp));
            let mut ops: Vec<Option<CMatrix>> = vec![None; all.len()];
            for (k, op) in ops.iter_mut().enumerate().take(dims.len()) {
                // π̂ element ⟨i|O|i'⟩ = δ_{i,j'} δ_{i',j}
                let mut o = CMatrix::zeros(dims[k], dims[k]);
                o[(djp[k], dj[k])] = ONE;
                *op = Some(o);
            }
            let mpo = LocalMPO::product(&all, ops)?;
            rho[(j, jp)] = state.expect_mpo(&mpo)?;
        }
    }
    Ok(rho)
}

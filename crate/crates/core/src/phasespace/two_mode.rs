//! Two-mode diagnostics: entanglement negativity, the number-conserving
//! mode rotation `Ŵ(Φ,Θ)` and the search for the rotation that removes the
//! most entanglement.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::density::FockDensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// `(‖ρ^{T_A}‖₁ − 1)/2`, transposing the first mode.
pub fn entanglement_negativity(rho: &FockDensityMatrix) -> Result<f64> {
    if rho.n_modes() != 2 {
        return Err(Error::Validation("entanglement negativity needs a two-mode state".into()));
    }
    let (da, db) = (rho.dims[0], rho.dims[1]);
    let n = da * db;
    let m = &rho.matrix;
    let pt = CMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / db, r % db);
        let (ip, jp) = (c / db, c % db);
        m[(ip * db + j, i * db + jp)]
    });
    let (w, _) = linalg::eigh(&pt)?;
    let norm1: f64 = w.iter().map(|x| x.abs()).sum();
    Ok(((norm1 - 1.0) / 2.0).max(0.0))
}

/// `ρ' = Ŵ†ρŴ` with `Ŵ = exp{Φ(e^{iΘ}Â†B̂ − e^{−iΘ}ÂB̂†)}`. In `ρ'` the first
/// mode is `cos Φ Â − e^{iΘ} sin Φ B̂` of the input.
///
/// `Ŵ` conserves the total photon number, so it is built exactly block by
/// block. The input is embedded into cutoffs `dA + dB − 1`, which holds every
/// redistributed photon; `out_cutoff` optionally restricts the result.
pub fn two_mode_bs_transform(
    rho: &FockDensityMatrix,
    phi: f64,
    theta: f64,
    out_cutoff: Option<usize>,
) -> Result<FockDensityMatrix> {
    if rho.n_modes() != 2 {
        return Err(Error::Validation("mode rotation needs a two-mode state".into()));
    }
    let (da, db) = (rho.dims[0], rho.dims[1]);
    let c = da + db - 1;
    let w = rotation_matrix(phi, theta, c)?;
    let embed = |j: usize| (j / db) * c + (j % db);
    let n_in = da * db;
    // Only columns of Ŵ that touch the input support matter: ρ' = Ŵ† ρ Ŵ.
    let mut wsub = CMatrix::zeros(n_in, c * c);
    for j in 0..n_in {
        let row = embed(j);
        for k in 0..c * c {
            wsub[(j, k)] = w[(row, k)];
        }
    }
    let out = wsub.adjoint() * &rho.matrix * &wsub;
    let full = FockDensityMatrix::from_raw(&[c, c], out)?;
    match out_cutoff {
        Some(k) if k < c => full.restrict(&[k, k]),
        _ => Ok(full),
    }
}

/// Dense `Ŵ(Φ,Θ)` on two modes of cutoff `c`, exact on total photon number
/// `< c`; index `i·c + j` for `|i, j⟩`.
pub fn rotation_matrix(phi: f64, theta: f64, c: usize) -> Result<CMatrix> {
    let mut w = CMatrix::zeros(c * c, c * c);
    let ep = C64::from_polar(phi, theta);
    for total in 0..c {
        let dim = total + 1;
        // basis |k, total−k⟩, k = 0..=total; H = −iG is Hermitian
        let mut h = CMatrix::zeros(dim, dim);
        for k in 0..total {
            // Â†B̂ |k, total−k⟩ = √((k+1)(total−k)) |k+1, total−k−1⟩
            let amp = (((k + 1) * (total - k)) as f64).sqrt();
            let g = ep * amp;
            h[(k + 1, k)] = C64::new(0.0, -1.0) * g;
            h[(k, k + 1)] = (C64::new(0.0, -1.0) * g).conj();
        }
        let block = linalg::exp_i_hermitian(&h, 1.0)?;
        for r in 0..dim {
            for s in 0..dim {
                w[(r * c + (total - r), s * c + (total - s))] = block[(r, s)];
            }
        }
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub n_phi: usize,
    pub n_theta: usize,
    pub refine: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { n_phi: 41, n_theta: 41, refine: true, tol: 1e-4, max_iter: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct BsSearchResult {
    /// Grid axes over `Φ ∈ [−π/4, π/4]`, `Θ ∈ [−π/2, π/2]`.
    pub phis: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `values[i_phi * n_theta + i_theta]`
    pub values: Vec<f64>,
    pub phi0: f64,
    pub theta0: f64,
    pub minimum: f64,
    pub at_origin: f64,
}

impl BsSearchResult {
    pub fn at(&self, i_phi: usize, i_theta: usize) -> f64 {
        self.values[i_phi * self.thetas.len() + i_theta]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("Phi,Theta,N\n");
        for (i, p) in self.phis.iter().enumerate() {
            for (j, t) in self.thetas.iter().enumerate() {
                out.push_str(&format!("{p},{t},{:e}\n", self.at(i, j)));
            }
        }
        out
    }
}

fn axis(half: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64).collect()
}

/// Grid scan of `N(Ŵ†ρŴ)` followed by a simplex refinement from the best
/// grid point. Ties on the grid go to the point with the smallest
/// `(|Φ|, |Θ|)`, so a flat landscape returns `(0, 0)`.
pub fn disentangle_search(rho: &FockDensityMatrix, opts: SearchOptions) -> Result<BsSearchResult> {
    if opts.n_phi == 0 || opts.n_theta == 0 {
        return Err(Error::Validation("empty search grid".into()));
    }
    let phis = axis(FRAC_PI_4, opts.n_phi);
    let thetas = axis(FRAC_PI_2, opts.n_theta);
    let objective = |p: f64, t: f64| -> Result<f64> { entanglement_negativity(&two_mode_bs_transform(rho, p, t, None)?) };
    let points: Vec<(f64, f64)> = phis.iter().flat_map(|&p| thetas.iter().map(move |&t| (p, t))).collect();
    let values: Vec<f64> = points.par_iter().map(|&(p, t)| objective(p, t)).collect::<Result<_>>()?;
    let at_origin = objective(0.0, 0.0)?;

    let tie = 1e-12;
    let mut best = 0;
    for k in 1..points.len() {
        let (v, b) = (values[k], values[best]);
        let closer = (points[k].0.abs(), points[k].1.abs()) < (points[best].0.abs(), points[best].1.abs());
        if v < b - tie || (v <= b + tie && closer) {
            best = k;
        }
    }
    let (mut phi0, mut theta0) = points[best];
    let mut minimum = values[best];
    if opts.refine && opts.n_phi > 1 && opts.n_theta > 1 {
        let step = [phis[1] - phis[0], thetas[1] - thetas[0]];
        let f = |v: [f64; 2]| -> f64 {
            let p = v[0].clamp(-FRAC_PI_4, FRAC_PI_4);
            let t = v[1].clamp(-FRAC_PI_2, FRAC_PI_2);
            objective(p, t).unwrap_or(f64::INFINITY)
        };
        let (x, fx) = nelder_mead(f, [phi0, theta0], step, opts.tol, opts.max_iter);
        if fx < minimum - tie {
            phi0 = x[0].clamp(-FRAC_PI_4, FRAC_PI_4);
            theta0 = x[1].clamp(-FRAC_PI_2, FRAC_PI_2);
            minimum = fx;
        }
    }
    Ok(BsSearchResult { phis, thetas, values, phi0, theta0, minimum, at_origin })
}

/// Downhill simplex in two dimensions; stops when the spread of objective
/// values over the simplex falls below `tol`.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: [f64; 2], tol: f64, max_iter: usize) -> ([f64; 2], f64) {
    let mut simplex = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut fv = simplex.map(&f);
    for _ in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        simplex = order.map(|k| simplex[k]);
        fv = order.map(|k| fv[k]);
        if (fv[2] - fv[0]).abs() < tol {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along = |t: f64| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < fv[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                simplex[2] = xe;
                fv[2] = fe;
            } else {
                simplex[2] = xr;
                fv[2] = fr;
            }
        } else if fr < fv[1] {
            simplex[2] = xr;
            fv[2] = fr;
        } else {
            let xc = if fr < fv[2] { along(-0.5) } else { along(0.5) };
            let fc = f(xc);
            if fc < fv[2].min(fr) {
                simplex[2] = xc;
                fv[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [(simplex[0][0] + simplex[k][0]) / 2.0, (simplex[0][1] + simplex[k][1]) / 2.0];
                    fv[k] = f(simplex[k]);
                }
            }
        }
    }
    let k = (0..3).min_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap_or(0);
    (simplex[k], fv[k])
}

/// Single-mode Hartree-Fock soliton state
/// `e^{−n̄/2} Σ_n e^{i(2n−n̄)n̄nt/8} α^n/√n! |n⟩`, `α = √n̄`, normalized within
/// the cutoff.
pub fn tdhf_state(nbar: f64, t: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    if !(nbar >= 0.0) || cutoff == 0 {
        return Err(Error::Validation(format!("tdhf state needs n̄ ≥ 0 and cutoff ≥ 1, got {nbar}, {cutoff}")));
    }
    let amps = tdhf_amplitudes(nbar, t, cutoff);
    FockDensityMatrix::from_pure(&[cutoff], &amps)
}

pub fn tdhf_amplitudes(nbar: f64, t: f64, cutoff: usize) -> Vec<C64> {
    let mut amps: Vec<C64> = (0..cutoff)
        .map(|n| {
            let nf = n as f64;
            let ln_mag = -nbar / 2.0 + if n == 0 { 0.0 } else { 0.5 * nf * nbar.ln() } - 0.5 * crate::fock::ln_factorial(n);
            let phase = (2.0 * nf - nbar) * nbar * nf * t / 8.0;
            C64::from_polar(ln_mag.exp(), phase)
        })
        .collect();
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        amps.iter_mut().for_each(|c| *c /= norm);
    } else {
        amps[0] = C64::new(1.0, 0.0);
    }
    amps
}

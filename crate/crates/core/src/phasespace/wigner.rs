//! Wigner functions of single-mode density matrices.
//!
//! Phase-space coordinates are `x = √2 Re α`, `p = √2 Im α`, so the vacuum
//! peaks at `1/π` and `∫∫ W dx dp = Tr ρ`. A coherent state `|α⟩` is centred
//! at `(√2 Re α, √2 Im α)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::density::FockDensityMatrix;
use crate::error::{Error, Result};
use crate::fock::ln_factorial;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        GridSpec { x_min: -half_width, x_max: half_width, p_min: -half_width, p_max: half_width, nx: n, np: n }
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.np < 2 || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::Validation(format!("degenerate Wigner grid {self:?}")));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// `values[ip * nx + ix] = W(xs[ix], ps[ip])`.
#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl WignerGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.spec.nx + ix]
    }

    pub fn dx(&self) -> f64 {
        (self.spec.x_max - self.spec.x_min) / (self.spec.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.spec.p_max - self.spec.p_min) / (self.spec.np - 1) as f64
    }

    /// Trapezoidal `∫∫ g(W) dx dp`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let (nx, np) = (self.spec.nx, self.spec.np);
        let mut acc = 0.0;
        for ip in 0..np {
            let wp = if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 };
            for ix in 0..nx {
                let wx = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
                acc += wp * wx * g(self.at(ix, ip));
            }
        }
        acc * self.dx() * self.dp()
    }

    pub fn total(&self) -> f64 {
        self.integrate(|w| w)
    }

    /// Largest `|W|` on the outer ring of the grid.
    pub fn boundary_max(&self) -> f64 {
        let (nx, np) = (self.spec.nx, self.spec.np);
        let mut m: f64 = 0.0;
        for ix in 0..nx {
            m = m.max(self.at(ix, 0).abs()).max(self.at(ix, np - 1).abs());
        }
        for ip in 0..np {
            m = m.max(self.at(0, ip).abs()).max(self.at(nx - 1, ip).abs());
        }
        m
    }

    /// Grid position of the maximum.
    pub fn argmax(&self) -> (f64, f64) {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
        let xs = self.spec.xs();
        let ps = self.spec.ps();
        (xs[k % self.spec.nx], ps[k / self.spec.nx])
    }

    pub fn to_csv(&self) -> String {
        let xs = self.spec.xs();
        let ps = self.spec.ps();
        let mut out = String::from("x,p,W\n");
        for (ip, p) in ps.iter().enumerate() {
            for (ix, x) in xs.iter().enumerate() {
                out.push_str(&format!("{x},{p},{:e}\n", self.at(ix, ip)));
            }
        }
        out
    }
}

/// Pointwise evaluator with `(−1)^n √(n!/(n+k)!) ρ_{n,n+k}` cached.
struct Evaluator {
    d: usize,
    /// indexed `[k][n]`
    coef: Vec<Vec<C64>>,
}

impl Evaluator {
    fn new(rho: &FockDensityMatrix) -> Self {
        let d = rho.dim();
        let m = &rho.matrix;
        let coef = (0..d)
            .map(|k| {
                (0..d - k)
                    .map(|n| {
                        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                        m[(n, n + k)] * (sign * (0.5 * (ln_factorial(n) - ln_factorial(n + k))).exp())
                    })
                    .collect()
            })
            .collect();
        Evaluator { d, coef }
    }

    /// `W(x,p) = (1/π) e^{−|γ|²/2} Σ_{nm} ρ_{nm} (−1)^n ⟨m|D(γ)|n⟩`, `γ = √2 (x + ip)`,
    /// summed diagonal by diagonal with the Laguerre three-term recurrence.
    fn eval(&self, x: f64, p: f64) -> f64 {
        let gamma = C64::new(x, p) * std::f64::consts::SQRT_2;
        let r2 = gamma.norm_sqr();
        let ln_g = if r2 > 0.0 { 0.5 * r2.ln() } else { f64::NEG_INFINITY };
        let arg = gamma.arg();
        let mut acc = 0.0;
        for k in 0..self.d {
            let len = self.d - k;
            // L_n^{(k)}(r2) for n = 0..len
            let mut l_prev = 0.0;
            let mut l_cur = 1.0;
            let mut diag = C64::new(0.0, 0.0);
            for n in 0..len {
                if n > 0 {
                    let nf = (n - 1) as f64;
                    let next = ((2.0 * nf + 1.0 + k as f64 - r2) * l_cur - (nf + k as f64) * l_prev) / (nf + 1.0);
                    l_prev = l_cur;
                    l_cur = next;
                }
                diag += self.coef[k][n] * l_cur;
            }
            if k == 0 {
                acc += diag.re;
            } else if r2 > 0.0 {
                let gk = C64::from_polar((k as f64 * ln_g).exp(), k as f64 * arg);
                acc += 2.0 * (diag * gk).re;
            }
        }
        acc * (-0.5 * r2).exp() / PI
    }
}

/// Wigner function of a single-mode state on a rectangular grid.
pub fn wigner(rho: &FockDensityMatrix, spec: GridSpec) -> Result<WignerGrid> {
    if rho.n_modes() != 1 {
        return Err(Error::Validation("Wigner function needs a single-mode state".into()));
    }
    spec.validate()?;
    let ev = Evaluator::new(rho);
    let xs = spec.xs();
    let ps = spec.ps();
    let values: Vec<f64> = ps
        .par_iter()
        .flat_map_iter(|&p| xs.iter().map(move |&x| (x, p)).collect::<Vec<_>>())
        .map(|(x, p)| ev.eval(x, p))
        .collect();
    let mut warnings = Vec::new();
    let d = rho.dim();
    let tail: f64 = (d.saturating_sub(2)..d).map(|n| rho.matrix[(n, n)].re).sum();
    if tail > 1e-4 {
        warnings.push(format!("population {tail:.2e} in the top two Fock levels; cutoff may be too small"));
    }
    Ok(WignerGrid { spec, values, warnings })
}

/// Single-point evaluation.
pub fn wigner_at(rho: &FockDensityMatrix, x: f64, p: f64) -> Result<f64> {
    if rho.n_modes() != 1 {
        return Err(Error::Validation("Wigner function needs a single-mode state".into()));
    }
    Ok(Evaluator::new(rho).eval(x, p))
}

#[derive(Clone, Copy, Debug)]
pub struct NegativityOptions {
    /// Grid spacing in `x` and `p`.
    pub spacing: f64,
    pub boundary_tol: f64,
    pub max_doublings: usize,
}

impl Default for NegativityOptions {
    fn default() -> Self {
        NegativityOptions { spacing: 0.05, boundary_tol: 1e-6, max_doublings: 4 }
    }
}

/// Doubled negative volume `∫∫ (|W| − W) dx dp`. The square grid starts at a
/// half-width set by the cutoff and doubles until `|W| < boundary_tol` on
/// its boundary.
pub fn wigner_negativity_volume(rho: &FockDensityMatrix, opts: NegativityOptions) -> Result<f64> {
    let mut half = (2.0 * rho.dim() as f64 + 1.0).sqrt() + 3.0;
    for _ in 0..=opts.max_doublings {
        let n = (2.0 * half / opts.spacing).ceil() as usize + 1;
        let g = wigner(rho, GridSpec::square(half, n))?;
        if g.boundary_max() < opts.boundary_tol {
            return Ok(g.integrate(|w| w.abs() - w));
        }
        half *= 2.0;
    }
    Err(Error::Quadrature(format!(
        "Wigner function still above {:.1e} on the boundary at half-width {half}",
        opts.boundary_tol
    )))
}

//! Mean-field split-step Fourier integrators on a periodic grid:
//!
//! ```text
//! χ³:  i∂tφ = −½∂z²φ − |φ|²φ
//! χ²:  i∂tφ = −½∂z²φ + φ*ψ,   i∂tψ = −(β/2)∂z²ψ + ½φ²
//! ```
//!
//! Both use a symmetric (Strang) splitting: half nonlinear step, full
//! dispersive step in Fourier space, half nonlinear step. The χ³ nonlinear
//! step is an exact phase rotation; the χ² one is a pointwise RK4 substep.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ClassicalField {
    pub dz: f64,
    pub t: f64,
    pub phi: Vec<C64>,
    /// SH envelope for χ² runs.
    pub psi: Option<Vec<C64>>,
}

impl ClassicalField {
    pub fn chi3(dz: f64, phi: Vec<C64>) -> Self {
        ClassicalField { dz, t: 0.0, phi, psi: None }
    }

    pub fn chi2(dz: f64, phi: Vec<C64>, psi: Vec<C64>) -> Self {
        ClassicalField { dz, t: 0.0, phi, psi: Some(psi) }
    }

    pub fn photon_number(&self) -> f64 {
        self.phi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dz
    }

    /// `Σ(|φ|² + 2|ψ|²)Δz`
    pub fn manley_rowe(&self) -> f64 {
        let sh = self.psi.as_ref().map(|p| p.iter().map(|c| c.norm_sqr()).sum::<f64>()).unwrap_or(0.0);
        self.photon_number() + 2.0 * sh * self.dz
    }

    fn check(&self) -> Result<()> {
        if self.phi.is_empty() || !(self.dz > 0.0) {
            return Err(Error::Validation("classical field needs points and Δz > 0".into()));
        }
        if let Some(psi) = &self.psi {
            if psi.len() != self.phi.len() {
                return Err(Error::Validation("FH and SH grids differ".into()));
            }
        }
        if self.phi.iter().chain(self.psi.iter().flatten()).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical { site: 0, msg: "non-finite classical field".into() });
        }
        Ok(())
    }
}

struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k2: Vec<f64>,
    scratch: Vec<C64>,
}

impl Spectral {
    fn new(n: usize, dz: f64) -> Self {
        let mut planner = FftPlanner::new();
        let length = n as f64 * dz;
        let k2 = (0..n)
            .map(|j| {
                let j = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                let k = 2.0 * PI * j / length;
                k * k
            })
            .collect();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Spectral { fwd, inv, k2, scratch: vec![C64::new(0.0, 0.0); len] }
    }

    /// `v ← exp(−i·coeff·k²·dt/2) v` in Fourier space.
    fn disperse(&mut self, v: &mut [C64], coeff: f64, dt: f64) {
        self.fwd.process_with_scratch(v, &mut self.scratch);
        let inv_n = 1.0 / v.len() as f64;
        for (c, k2) in v.iter_mut().zip(&self.k2) {
            *c *= C64::from_polar(inv_n, -coeff * k2 * dt / 2.0);
        }
        self.inv.process_with_scratch(v, &mut self.scratch);
    }
}

/// Advance a χ³ field by `steps` steps of size `dt`.
pub fn split_step_chi3(field: &ClassicalField, dt: f64, steps: usize) -> Result<ClassicalField> {
    Ok(evolve_chi3(field, dt, steps, 0)?.pop().expect("final state"))
}

/// χ³ evolution returning snapshots every `stride` steps (and the last);
/// `stride = 0` keeps only the final state.
pub fn evolve_chi3(field: &ClassicalField, dt: f64, steps: usize, stride: usize) -> Result<Vec<ClassicalField>> {
    field.check()?;
    let mut f = field.clone();
    f.psi = None;
    let mut sp = Spectral::new(f.phi.len(), f.dz);
    let mut out = Vec::new();
    if stride > 0 {
        out.push(f.clone());
    }
    let half_kerr = |v: &mut [C64]| {
        for c in v.iter_mut() {
            *c *= C64::from_polar(1.0, c.norm_sqr() * dt / 2.0);
        }
    };
    for step in 1..=steps {
        half_kerr(&mut f.phi);
        sp.disperse(&mut f.phi, 1.0, dt);
        half_kerr(&mut f.phi);
        f.t += dt;
        if (stride > 0 && step % stride == 0) || step == steps {
            out.push(f.clone());
        }
    }
    if steps == 0 {
        out.push(f.clone());
    }
    f.check()?;
    Ok(out)
}

/// Advance a χ² field pair by `steps` steps of size `dt` with SH dispersion
/// ratio `beta`.
pub fn split_step_chi2(field: &ClassicalField, beta: f64, dt: f64, steps: usize) -> Result<ClassicalField> {
    Ok(evolve_chi2(field, beta, dt, steps, 0)?.pop().expect("final state"))
}

pub fn evolve_chi2(field: &ClassicalField, beta: f64, dt: f64, steps: usize, stride: usize) -> Result<Vec<ClassicalField>> {
    field.check()?;
    let mut phi = field.phi.clone();
    let mut psi = field.psi.clone().ok_or_else(|| Error::Validation("χ² run needs an SH field".into()))?;
    let mut sp = Spectral::new(phi.len(), field.dz);
    let mut out = Vec::new();
    let mut t = field.t;
    let snap = |phi: &[C64], psi: &[C64], t: f64| ClassicalField { dz: field.dz, t, phi: phi.to_vec(), psi: Some(psi.to_vec()) };
    if stride > 0 {
        out.push(snap(&phi, &psi, t));
    }
    for step in 1..=steps {
        nl_chi2(&mut phi, &mut psi, dt / 2.0);
        sp.disperse(&mut phi, 1.0, dt);
        sp.disperse(&mut psi, beta, dt);
        nl_chi2(&mut phi, &mut psi, dt / 2.0);
        t += dt;
        if (stride > 0 && step % stride == 0) || step == steps {
            out.push(snap(&phi, &psi, t));
        }
    }
    if steps == 0 {
        out.push(snap(&phi, &psi, t));
    }
    out.last().expect("nonempty").check()?;
    Ok(out)
}

/// RK4 for `φ' = −i φ*ψ`, `ψ' = −(i/2) φ²` at every grid point.
fn nl_chi2(phi: &mut [C64], psi: &mut [C64], h: f64) {
    let mi = C64::new(0.0, -1.0);
    let rhs = |a: C64, b: C64| (mi * a.conj() * b, mi * 0.5 * a * a);
    for (a, b) in phi.iter_mut().zip(psi.iter_mut()) {
        let (k1a, k1b) = rhs(*a, *b);
        let (k2a, k2b) = rhs(*a + k1a * (h / 2.0), *b + k1b * (h / 2.0));
        let (k3a, k3b) = rhs(*a + k2a * (h / 2.0), *b + k2b * (h / 2.0));
        let (k4a, k4b) = rhs(*a + k3a * h, *b + k3b * h);
        *a += (k1a + 2.0 * k2a + 2.0 * k3a + k4a) * (h / 6.0);
        *b += (k1b + 2.0 * k2b + 2.0 * k3b + k4b) * (h / 6.0);
    }
}

/// `t,z,fh,sh` rows of `|φ|²` and `|ψ|²` (SH column empty for χ³).
pub fn history_csv(history: &[ClassicalField], z: &[f64]) -> String {
    let mut out = String::from("t,z,fh_density,sh_density\n");
    for f in history {
        for (j, zj) in z.iter().enumerate() {
            let sh = f.psi.as_ref().map(|p| format!("{:e}", p[j].norm_sqr())).unwrap_or_default();
            let _ = writeln!(out, "{},{},{:e},{}", f.t, zj, f.phi[j].norm_sqr(), sh);
        }
    }
    out
}

//! Classical pulse shapes sampled on the bin grid, and the normalized
//! supermode vectors built from them.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Uniform grid of `n` bins over `[−L/2, L/2]`, sampled at bin centres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub length: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() || n == 0 {
            return Err(Error::Validation(format!("grid needs L > 0 and N ≥ 1, got L={length}, N={n}")));
        }
        Ok(Grid { length, n })
    }

    pub fn dz(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dz = self.dz();
        (0..self.n).map(|m| -self.length / 2.0 + (m as f64 + 0.5) * dz).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        self.centers().into_iter().map(f).collect()
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Fundamental soliton `(n̄/2) sech(n̄z/2) e^{i n̄² t/8}`.
pub fn sech_field(nbar: f64, z: f64, t: f64) -> C64 {
    C64::from_polar(nbar / 2.0 * sech(nbar * z / 2.0), nbar * nbar * t / 8.0)
}

/// Second-order soliton (breather) whose fundamental counterpart carries `n̄`
/// photons; intensity period `2π/n̄²`.
pub fn breather_field(nbar: f64, z: f64, t: f64) -> C64 {
    let x = nbar * z;
    if x.abs() > 300.0 {
        // cosh(2x) overflows; the field is far below f64 resolution here
        return C64::new(0.0, 0.0);
    }
    let num = C64::from_polar(3.0 * (x / 2.0).cosh(), nbar * nbar * t) + (1.5 * x).cosh();
    let den = 3.0 * (nbar * nbar * t).cos() + 4.0 * x.cosh() + (2.0 * x).cosh();
    C64::from_polar(2.0 * nbar, nbar * nbar * t / 8.0) * num / den
}

/// Simulton peak `φ₀ = (3n̄²/32)^{1/3}`.
pub fn simulton_phi0(nbar: f64) -> f64 {
    (3.0 * nbar * nbar / 32.0).cbrt()
}

/// Simulton at `β = 2`: `(φ, ψ) = (φ₀, −φ₀/2)·sech²(√(φ₀/6) z)` with phases
/// `e^{iφ₀t/3}`, `e^{2iφ₀t/3}`.
pub fn simulton_fields(nbar: f64, z: f64, t: f64) -> (C64, C64) {
    let p0 = simulton_phi0(nbar);
    let s2 = sech((p0 / 6.0).sqrt() * z).powi(2);
    (C64::from_polar(p0 * s2, p0 * t / 3.0), C64::from_polar(-p0 / 2.0 * s2, 2.0 * p0 * t / 3.0))
}

/// L²-normalize a vector.
pub fn normalized(v: &[C64]) -> Result<Vec<C64>> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Undefined("cannot normalize a zero envelope".into()));
    }
    Ok(v.iter().map(|c| c / norm).collect())
}

/// A sampled classical field together with its supermode and the coherent
/// amplitude placed in that supermode.
#[derive(Clone, Debug)]
pub struct PulseMode {
    pub field: Vec<C64>,
    pub mode: Vec<C64>,
    pub alpha: C64,
}

pub fn sech_pulse(nbar: f64, grid: &Grid) -> Result<PulseMode> {
    check_nbar(nbar)?;
    let field = grid.sample(|z| sech_field(nbar, z, 0.0));
    Ok(PulseMode { mode: normalized(&field)?, field, alpha: C64::new(nbar.sqrt(), 0.0) })
}

/// Second-order soliton at `t = 0`; it carries `4n̄` photons.
pub fn breather_pulse(nbar: f64, grid: &Grid) -> Result<PulseMode> {
    check_nbar(nbar)?;
    let field = grid.sample(|z| breather_field(nbar, z, 0.0));
    Ok(PulseMode { mode: normalized(&field)?, field, alpha: C64::new(2.0 * nbar.sqrt(), 0.0) })
}

/// FH and SH simulton modes. Both supermodes are the normalized positive
/// `sech²` shape; the SH sign sits in its displacement `−√n̄/2`.
pub fn simulton_pulse(nbar: f64, grid: &Grid) -> Result<(PulseMode, PulseMode)> {
    check_nbar(nbar)?;
    let fh = grid.sample(|z| simulton_fields(nbar, z, 0.0).0);
    let sh = grid.sample(|z| simulton_fields(nbar, z, 0.0).1);
    let mode = normalized(&fh)?;
    Ok((
        PulseMode { mode: mode.clone(), field: fh, alpha: C64::new(nbar.sqrt(), 0.0) },
        PulseMode { mode, field: sh, alpha: C64::new(-nbar.sqrt() / 2.0, 0.0) },
    ))
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar > 0.0) || !nbar.is_finite() {
        return Err(Error::Validation(format!("mean photon number must be positive, got {nbar}")));
    }
    Ok(())
}

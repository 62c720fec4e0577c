//! Single-mode operators on a truncated Fock space `{|0⟩, …, |d−1⟩}`.

use num_complex::Complex64 as C64;

use crate::linalg::{CMatrix, ZERO};

/// Annihilation operator `a` with `a|n⟩ = √n |n−1⟩`.
pub fn annihilation(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation(d: usize) -> CMatrix {
    annihilation(d).adjoint()
}

pub fn number(d: usize) -> CMatrix {
    diagonal(d, |n| n as f64)
}

pub fn diagonal(d: usize, f: impl Fn(usize) -> f64) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for n in 0..d {
        m[(n, n)] = C64::new(f(n), 0.0);
    }
    m
}

/// Diagonal unitary `diag(exp(i·phase(n)))`.
pub fn phase_diagonal(d: usize, phase: impl Fn(usize) -> f64) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for n in 0..d {
        m[(n, n)] = C64::from_polar(1.0, phase(n));
    }
    m
}

pub fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Truncated coherent-state amplitudes `e^{−|β|²/2} β^n / √n!` for `n < d`,
/// unnormalized. The returned deficit is `1 − Σ|c_n|²`.
pub fn coherent_amplitudes(beta: C64, d: usize) -> (Vec<C64>, f64) {
    let mut amps = Vec::with_capacity(d);
    let prefactor = (-beta.norm_sqr() / 2.0).exp();
    let mut term = C64::new(prefactor, 0.0);
    for n in 0..d {
        if n > 0 {
            term *= beta / (n as f64).sqrt();
        }
        amps.push(term);
    }
    let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    (amps, (1.0 - kept).max(0.0))
}

/// Smallest cutoff whose truncated coherent state at `|β|²` has norm deficit
/// below `tol`.
pub fn cutoff_for_coherent(mean_photons: f64, tol: f64) -> usize {
    let beta = C64::new(mean_photons.max(0.0).sqrt(), 0.0);
    let mut d = 1;
    loop {
        let (_, deficit) = coherent_amplitudes(beta, d);
        if deficit < tol || d > 400 {
            return d;
        }
        d += 1;
    }
}

pub fn zeros_vec(d: usize) -> Vec<C64> {
    vec![ZERO; d]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn commutator_is_identity_below_cutoff() {
        let d = 6;
        let a = annihilation(d);
        let ad = creation(d);
        let comm = &a * &ad - &ad * &a;
        for n in 0..d - 1 {
            assert!((comm[(n, n)].re - 1.0).abs() < 1e-14);
        }
        assert!(max_abs_diff(&(&ad * &a), &number(d)) < 1e-14);
    }

    #[test]
    fn coherent_deficit_matches_poisson_tail() {
        let (amps, deficit) = coherent_amplitudes(C64::new(1.0, 0.0), 3);
        assert_eq!(amps.len(), 3);
        let tail = 1.0 - (-1.0f64).exp() * (1.0 + 1.0 + 0.5);
        assert!((deficit - tail).abs() < 1e-14);
        assert!(cutoff_for_coherent(3.0, 1e-8) >= 15);
    }
}

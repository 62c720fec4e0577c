use num_complex::Complex64 as C64;

use super::*;
use crate::error::Error;
use crate::fock;
use crate::gates::{chi2_schedule, chi3_schedule, Chi2Params, Chi3Params, TrotterVariant};
use crate::mps::{charge_mpo, init_coherent_mps, total_number_mpo, Truncation, VidalMPS};
use crate::oracles::{dense_evolve, dense_hamiltonian_chi3, DenseState};

fn sech_envelope(n: usize, scale: f64) -> Vec<C64> {
    let raw: Vec<f64> = (0..n).map(|m| 1.0 / (scale * (m as f64 - (n as f64 - 1.0) / 2.0)).cosh()).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.iter().map(|x| C64::new(x / norm, 0.0)).collect()
}

#[test]
fn single_bin_is_exact_kerr() {
    let d = 20;
    let (length, dt, steps) = (0.8, 0.003, 100);
    let p = Chi3Params::new(length, 1, dt).unwrap();
    let s = chi3_schedule(&p, d, TrotterVariant::Strang).unwrap();
    let alpha = C64::new(1.3, 0.2);
    let mut mps = init_coherent_mps(&[C64::new(1.0, 0.0)], alpha, &[d], 1e-10, Truncation::exact()).unwrap();
    tebd_run(&mut mps, &s, RunOptions::new(steps, steps), &mut []).unwrap();
    let t = dt * steps as f64;
    let dz = length;
    let (amps, _) = fock::coherent_amplitudes(alpha, d);
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let exact: Vec<C64> = amps
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let nf = n as f64;
            let e = nf / (dz * dz) - nf * (nf - 1.0) / (2.0 * dz);
            c / norm * C64::from_polar(1.0, -e * t)
        })
        .collect();
    let got = mps.to_dense_statevector(4096).unwrap();
    let ov: C64 = got.iter().zip(&exact).map(|(a, b)| a.conj() * b).sum();
    assert!(ov.norm_sqr() >= 1.0 - 1e-10, "fidelity {}", ov.norm_sqr());
}

#[test]
fn vacuum_stays_vacuum() {
    let p = Chi3Params::new(4.0, 5, 0.01).unwrap();
    let s = chi3_schedule(&p, 4, TrotterVariant::Strang).unwrap();
    let mut mps = VidalMPS::vacuum(&[4; 5], Truncation::new(Some(8), 1e-12)).unwrap();
    let mut recs: Vec<Recorder> = vec![Box::new(|_, st: &VidalMPS| Ok(vec![("N".into(), st.total_photon_number())]))];
    let out = tebd_run(&mut mps, &s, RunOptions::new(20, 5), &mut recs).unwrap();
    assert_eq!(out.series.len(), 5);
    assert!(out.series.channel("N").unwrap().iter().all(|&x| x.abs() < 1e-14));
}

#[test]
fn three_bins_match_dense_evolution() {
    let d = 4;
    let p = Chi3Params::new(3.0, 3, 1e-3).unwrap();
    let s = chi3_schedule(&p, d, TrotterVariant::Strang).unwrap();
    let f = sech_envelope(3, 0.8);
    let mut mps = init_coherent_mps(&f, C64::new(0.8, 0.0), &[d; 3], 1e-2, Truncation::new(None, 0.0)).unwrap();
    let init = DenseState::new(&[d; 3], mps.to_dense_statevector(4096).unwrap()).unwrap();
    tebd_run(&mut mps, &s, RunOptions::new(100, 100), &mut []).unwrap();
    let h = dense_hamiltonian_chi3(&p, d).unwrap();
    let exact = dense_evolve(&init, &h, 0.1).unwrap();
    let got = DenseState::new(&[d; 3], mps.to_dense_statevector(4096).unwrap()).unwrap();
    assert!(got.fidelity(&exact) >= 1.0 - 1e-8);
    assert!((mps.norm_squared() - 1.0).abs() < 1e-10);
}

#[test]
fn chi3_conserves_photon_number() {
    let d = 4;
    let p = Chi3Params::new(4.0, 4, 0.01).unwrap();
    let s = chi3_schedule(&p, d, TrotterVariant::Strang).unwrap();
    let f = sech_envelope(4, 0.7);
    let mut mps = init_coherent_mps(&f, C64::new(1.0, 0.0), &[d; 4], 1e-2, Truncation::new(None, 0.0)).unwrap();
    let mpo = total_number_mpo(&[d; 4]).unwrap();
    let n0 = mps.expect_mpo(&mpo).unwrap().re;
    tebd_run(&mut mps, &s, RunOptions::new(100, 100), &mut []).unwrap();
    assert!((mps.expect_mpo(&mpo).unwrap().re - n0).abs() <= 1e-8);
}

#[test]
fn chi2_conserves_charge() {
    let (d_a, d_b) = (4, 3);
    let p = Chi2Params::new(2.0, 3, 0.01, 2.0).unwrap();
    let s = chi2_schedule(&p, d_a, d_b, TrotterVariant::Strang).unwrap();
    let dims = [d_a, d_b, d_a, d_b, d_a, d_b];
    let mut locals = Vec::new();
    for (k, &d) in dims.iter().enumerate() {
        let beta = if k % 2 == 0 { C64::new(0.5, 0.0) } else { C64::new(-0.25, 0.0) };
        locals.push(fock::coherent_amplitudes(beta, d).0);
    }
    let mut mps = VidalMPS::product(&locals, Truncation::new(None, 0.0)).unwrap();
    let q = charge_mpo(&dims).unwrap();
    let q0 = mps.expect_mpo(&q).unwrap().re;
    tebd_run(&mut mps, &s, RunOptions::new(100, 100), &mut []).unwrap();
    assert!((mps.expect_mpo(&q).unwrap().re - q0).abs() <= 1e-8);
}

#[test]
fn hard_cap_returns_partial_series() {
    let d = 4;
    let p = Chi3Params::new(3.0, 6, 0.05).unwrap();
    let s = chi3_schedule(&p, d, TrotterVariant::Strang).unwrap();
    let f = sech_envelope(6, 0.6);
    let mut mps = init_coherent_mps(&f, C64::new(1.2, 0.0), &[d; 6], 1e-2, Truncation::new(None, 0.0)).unwrap();
    let mut opts = RunOptions::new(200, 1);
    opts.hard_cap = Some(3);
    let mut recs: Vec<Recorder> = vec![Box::new(|_, st: &VidalMPS| Ok(vec![("chi".into(), st.max_bond_dim() as f64)]))];
    let out = tebd_run(&mut mps, &s, opts, &mut recs).unwrap();
    assert!(matches!(out.aborted, Some(Error::BondExplosion { cap: 3, .. })));
    assert!(out.steps_done < 200);
    assert_eq!(out.series.len(), out.steps_done + 1);
}

#[test]
fn mcwf_trivial_cases() {
    let mut rng = trajectory_rng(1, 0);
    let mut mps = VidalMPS::fock(&[3], &[1], Truncation::exact()).unwrap();
    let before = mps.clone();
    assert_eq!(mcwf_step(&mut mps, &LossModel::new(0.0).unwrap(), 0.01, &mut rng).unwrap(), None);
    assert_eq!(mps.fidelity(&before).unwrap(), 1.0);

    // Force a jump: probability 0.09 per step; retry until one occurs.
    let loss = LossModel::new(9.0).unwrap();
    let mut jumped = false;
    for _ in 0..500 {
        let mut st = before.clone();
        if mcwf_step(&mut st, &loss, 0.01, &mut rng).unwrap() == Some(0) {
            let vac = VidalMPS::vacuum(&[3], Truncation::exact()).unwrap();
            assert!((st.fidelity(&vac).unwrap() - 1.0).abs() < 1e-15);
            jumped = true;
            break;
        }
    }
    assert!(jumped);
    let mut st = before.clone();
    assert!(matches!(mcwf_step(&mut st, &LossModel::new(20.0).unwrap(), 0.01, &mut rng), Err(Error::StepSize { .. })));
    assert!(LossModel::new(-1.0).is_err());
}

#[test]
fn ensembles_are_deterministic_in_any_mode() {
    let run = |parallel: bool| {
        run_ensemble(6, 42, parallel, |_, rng| {
            let mut mps = init_coherent_mps(&[C64::new(1.0, 0.0)], C64::new(1.5, 0.0), &[16], 1e-8, Truncation::exact())?;
            let loss = LossModel::new(0.5)?;
            let mut jumps = Vec::new();
            for k in 0..100 {
                if let Some(m) = mcwf_step(&mut mps, &loss, 0.02, rng)? {
                    jumps.push((k, m));
                }
            }
            Ok((jumps, mps.total_photon_number()))
        })
        .unwrap()
    };
    let a = run(false);
    let b = run(false);
    let c = run(true);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(a.iter().any(|(j, _)| !j.is_empty()));
}

#[test]
fn series_rejects_inconsistent_samples() {
    let mut s = ObservableSeries::new();
    s.push(0.0, vec![("a".into(), 1.0)]).unwrap();
    assert!(s.push(0.0, vec![("a".into(), 1.0)]).is_err());
    assert!(s.push(1.0, vec![("b".into(), 1.0)]).is_err());
    s.push(1.0, vec![("a".into(), 2.0)]).unwrap();
    assert_eq!(s.rows(), vec![(0.0, "a", 1.0), (1.0, "a", 2.0)]);
}

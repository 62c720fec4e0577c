//! Property suites shared by the `properties` test target and the acceptance
//! runner. Each suite returns the first counterexample as an error string.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpulse::config::{validate_config, RunConfig};
use qpulse::demux::beam_splitter_gate;
use qpulse::density::FockDensityMatrix;
use qpulse::evolve::apply_schedule;
use qpulse::export::{write_run, Manifest};
use qpulse::fock;
use qpulse::gates::{chi2_schedule, chi3_schedule, hopping_gate, nl3wm_gate, spm_gate, Chi2Params, Chi3Params, TrotterVariant};
use qpulse::linalg::{self, CMatrix};
use qpulse::mps::{charge_mpo, total_number_mpo, Truncation, TwoSiteGate, VidalMPS};
use qpulse::phasespace::{entanglement_negativity, two_mode_bs_transform, wigner, wigner_negativity_volume, GridSpec, NegativityOptions};
use qpulse::scenario::run_scenario;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn fail(e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    linalg::exp_i_hermitian(&h, 3.0).unwrap()
}

pub fn random_density(dims: &[usize], rank: usize, rng: &mut ChaCha8Rng) -> FockDensityMatrix {
    let n: usize = dims.iter().product();
    let mut m = CMatrix::zeros(n, n);
    for _ in 0..rank {
        let v = CMatrix::from_fn(n, 1, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        m += &v * v.adjoint();
    }
    FockDensityMatrix::from_raw(dims, m).unwrap()
}

/// Exact gates keep the state canonical; capped gates keep it normalized and
/// within the cap, and canonicalization restores the gauge.
pub fn mps_canonical_form(cases: u32) -> Result<(), String> {
    let strat = (2usize..6, 2usize..4, 1usize..6, 1usize..6, any::<u64>());
    check(cases, strat, |(n, d, chi, gates, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cap = chi + 1;
        let dims = vec![d; n];
        let mut exact = VidalMPS::random(&dims, chi, &mut rng, Truncation::new(None, 0.0)).map_err(fail)?;
        let mut capped = exact.clone();
        capped.truncation = Truncation::new(Some(cap), 1e-12);
        prop_assert!(exact.canonical_defect() < 1e-10, "initial defect {}", exact.canonical_defect());
        for _ in 0..gates {
            let m = rng.random_range(0..n - 1);
            let g = TwoSiteGate::new(d, d, random_unitary(d * d, &mut rng)).map_err(fail)?;
            exact.apply_two_site_gate(m, &g).map_err(fail)?;
            capped.apply_two_site_gate(m, &g).map_err(fail)?;
            prop_assert!(exact.canonical_defect() < 1e-9, "defect {} after gate on bond {m}", exact.canonical_defect());
            prop_assert!((exact.norm_squared() - 1.0).abs() < 1e-10);
            let drift = (capped.norm_squared() - 1.0).abs();
            prop_assert!(drift < 1e-10 + 4.0 * capped.cum_trunc_error(), "norm drift {drift} vs truncation {}", capped.cum_trunc_error());
            prop_assert!(capped.max_bond_dim() <= cap);
        }
        capped.canonicalize().map_err(fail)?;
        prop_assert!(capped.canonical_defect() < 1e-9, "defect {} after canonicalize", capped.canonical_defect());
        Ok(())
    })
}

/// Every gate factory returns a unitary for arbitrary parameters.
pub fn gate_unitarity(cases: u32) -> Result<(), String> {
    let strat = (0.05f64..2.0, -0.2f64..0.2, 2usize..6, 2usize..5, -3.0f64..3.0, -3.0f64..3.0);
    check(cases, strat, |(dz, dt, d, db, theta, phi)| {
        let spm = spm_gate(dz, dt, d);
        prop_assert!(linalg::unitarity_defect(&spm) < 1e-12);
        let hop = hopping_gate(dz, dt, 1.0, d).map_err(fail)?;
        prop_assert!(hop.unitarity_defect() < 1e-10, "hopping {}", hop.unitarity_defect());
        let nl = nl3wm_gate(dz, dt, d, db).map_err(fail)?;
        prop_assert!(nl.unitarity_defect() < 1e-10, "three-wave {}", nl.unitarity_defect());
        let bs = beam_splitter_gate(theta, phi, d).map_err(fail)?;
        prop_assert!(bs.unitarity_defect() < 1e-10, "beam splitter {}", bs.unitarity_defect());
        Ok(())
    })
}

fn coherent_product(dims: &[usize], amps: &[C64]) -> Vec<Vec<C64>> {
    dims.iter().zip(amps).map(|(&d, &b)| fock::coherent_amplitudes(b, d).0).collect()
}

/// Photon number (χ³) and Manley-Rowe charge (χ²) survive Trotter steps
/// with truncation disabled.
pub fn conservation_laws(cases: u32) -> Result<(), String> {
    let amp = || (-0.6f64..0.6, -0.6f64..0.6).prop_map(|(r, i)| C64::new(r, i));
    let strat = (2usize..5, proptest::collection::vec(amp(), 8), 0.005f64..0.03);
    check(cases, strat, |(n, amps, dt)| {
        let d = 4;
        let p = Chi3Params::new(n as f64, n, dt).map_err(fail)?;
        let s = chi3_schedule(&p, d, TrotterVariant::Strang).map_err(fail)?;
        let dims = vec![d; n];
        let mut mps = VidalMPS::product(&coherent_product(&dims, &amps[..n]), Truncation::new(None, 0.0)).map_err(fail)?;
        let num = total_number_mpo(&dims).map_err(fail)?;
        let n0 = mps.expect_mpo(&num).map_err(fail)?.re;
        for _ in 0..10 {
            apply_schedule(&mut mps, &s).map_err(fail)?;
        }
        let n1 = mps.expect_mpo(&num).map_err(fail)?.re;
        prop_assert!((n1 - n0).abs() < 1e-8, "photon number {n0} -> {n1}");

        let bins = n.min(3);
        let p = Chi2Params::new(bins as f64, bins, dt, 2.0).map_err(fail)?;
        let s = chi2_schedule(&p, 4, 3, TrotterVariant::Strang).map_err(fail)?;
        let dims: Vec<usize> = (0..2 * bins).map(|k| if k % 2 == 0 { 4 } else { 3 }).collect();
        let mut mps = VidalMPS::product(&coherent_product(&dims, &amps[..2 * bins]), Truncation::new(None, 0.0)).map_err(fail)?;
        let q = charge_mpo(&dims).map_err(fail)?;
        let q0 = mps.expect_mpo(&q).map_err(fail)?.re;
        for _ in 0..10 {
            apply_schedule(&mut mps, &s).map_err(fail)?;
        }
        let q1 = mps.expect_mpo(&q).map_err(fail)?.re;
        prop_assert!((q1 - q0).abs() < 1e-8, "charge {q0} -> {q1}");
        Ok(())
    })
}

/// `∫W = 1` on a grid wide enough for the cutoff, and the negativity volume
/// is nonnegative.
pub fn wigner_normalization(cases: u32) -> Result<(), String> {
    let strat = (1usize..9, 1usize..4, any::<u64>());
    check(cases, strat, |(d, rank, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&[d], rank, &mut rng);
        let half = (2.0 * d as f64 + 1.0).sqrt() + 4.0;
        let grid = wigner(&rho, GridSpec::square(half, 161)).map_err(fail)?;
        prop_assert!((grid.total() - 1.0).abs() <= 1e-3, "integral {}", grid.total());
        let v = wigner_negativity_volume(&rho, NegativityOptions::default()).map_err(fail)?;
        prop_assert!(v >= 0.0);
        Ok(())
    })
}

/// Entanglement negativity is nonnegative and vanishes on product states.
pub fn negativity_bounds(cases: u32) -> Result<(), String> {
    let strat = (1usize..5, 1usize..5, 1usize..4, any::<u64>());
    check(cases, strat, |(da, db, rank, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density(&[da], rank, &mut rng);
        let b = random_density(&[db], rank, &mut rng);
        let product = FockDensityMatrix::from_raw(&[da, db], linalg::kron(&a.matrix, &b.matrix)).map_err(fail)?;
        let n = entanglement_negativity(&product).map_err(fail)?;
        prop_assert!(n.abs() < 1e-10, "product state negativity {n}");
        let joint = random_density(&[da, db], rank, &mut rng);
        prop_assert!(entanglement_negativity(&joint).map_err(fail)? >= -1e-12);
        Ok(())
    })
}

/// `Ŵ(Φ, Θ)` and `Ŵ(−Φ, Θ + π)` are the same operator, and a phase on the
/// second mode shifts the map along Θ.
pub fn search_gauge_symmetry(cases: u32) -> Result<(), String> {
    let strat = (2usize..4, 2usize..4, -0.8f64..0.8, -1.6f64..1.6, -1.0f64..1.0, any::<u64>());
    check(cases, strat, |(da, db, phi, theta, chi, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&[da, db], 2, &mut rng);
        let n = |r: &FockDensityMatrix, p: f64, t: f64| -> Result<f64, TestCaseError> {
            entanglement_negativity(&two_mode_bs_transform(r, p, t, None).map_err(fail)?).map_err(fail)
        };
        let base = n(&rho, phi, theta)?;
        let mirrored = n(&rho, -phi, theta + std::f64::consts::PI)?;
        prop_assert!((base - mirrored).abs() < 1e-9, "{base} vs {mirrored}");

        // ρ' = R ρ R† with R = e^{iχ n_B}; the generator e^{iΘ}A†B picks up e^{iχ}.
        let r = linalg::kron(&linalg::identity(da), &fock::phase_diagonal(db, |k| chi * k as f64));
        let shifted = FockDensityMatrix::from_raw(&[da, db], &r * &rho.matrix * r.adjoint()).map_err(fail)?;
        let a = n(&shifted, phi, theta)?;
        let b = n(&rho, phi, theta + chi)?;
        let c = n(&rho, phi, theta - chi)?;
        prop_assert!((a - b).abs() < 1e-9 || (a - c).abs() < 1e-9, "{a} vs {b} / {c}");
        Ok(())
    })
}

pub const TINY_RUN: &str = r#"
scenario = "custom"

[physics]
length = 6.0
n_bins = 4
nbar = 0.6
kappa = 0.4
model = "chi3"
envelope = "sech"

[numerics]
dt = 0.02
steps = 20
cutoff = 8
chi_max = 10

[mcwf]
trajectories = 4
seed = 11

[analysis]
samples = 3
stride = 5
wigner_points = 31
"#;

pub fn digests(dir: &Path) -> BTreeMap<String, String> {
    Manifest::load(dir).unwrap().files
}

/// Running the same config twice, the second time from the first run's
/// manifest, gives bitwise-identical artifacts.
pub fn manifest_reproducibility() -> Result<(), String> {
    let mut cfg: RunConfig = validate_config(TINY_RUN).map_err(|e| e.to_string())?;
    cfg.mcwf.parallel = false;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = tmp.path().join("a");
    let second = tmp.path().join("b");
    let r = run_scenario(&cfg).map_err(|e| e.to_string())?;
    write_run(&first, &r).map_err(|e| e.to_string())?;
    let again = qpulse::export::load_config(&first.join("manifest.json")).map_err(|e| e.to_string())?;
    let r = run_scenario(&again).map_err(|e| e.to_string())?;
    write_run(&second, &r).map_err(|e| e.to_string())?;
    let (a, b) = (digests(&first), digests(&second));
    if a.is_empty() || a != b {
        return Err(format!("artifact digests differ:\n{a:?}\n{b:?}"));
    }
    Ok(())
}

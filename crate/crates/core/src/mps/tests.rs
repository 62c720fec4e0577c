use super::*;
use crate::linalg::{kron, max_abs_diff};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dense_expect(psi: &[C64], op: &CMatrix) -> C64 {
    let v = CMatrix::from_column_slice(psi.len(), 1, psi);
    (v.adjoint() * op * &v)[(0, 0)]
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let h = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let h = &h + h.adjoint();
    linalg::exp_i_hermitian(&h, 1.3).unwrap()
}

fn apply_dense_two_site(psi: &[C64], dims: &[usize], m: usize, u: &CMatrix) -> Vec<C64> {
    let left: usize = dims[..m].iter().product();
    let right: usize = dims[m + 2..].iter().product();
    let full = kron(&kron(&linalg::identity(left), u), &linalg::identity(right));
    let v = CMatrix::from_column_slice(psi.len(), 1, psi);
    (full * v).iter().copied().collect()
}

#[test]
fn coherent_product_state_has_expected_moments() {
    let f = vec![C64::new(1.0, 0.0), ZERO];
    let mps = init_coherent_mps(&f, ONE, &[12, 12], 1e-8, Truncation::exact()).unwrap();
    let a = fock::annihilation(12);
    assert!((mps.local_expectation(0, &a).unwrap() - ONE).norm() < 1e-6);
    assert!(mps.local_expectation(1, &a).unwrap().norm() < 1e-14);
    assert!(mps.bond_dims().iter().all(|&c| c == 1));
}

#[test]
fn vacuum_from_zero_displacement() {
    let f = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let mps = init_coherent_mps(&f, ZERO, &[3, 3], 1e-8, Truncation::exact()).unwrap();
    assert_eq!(mps.total_photon_number(), 0.0);
    assert!(mps.lambdas().iter().all(|l| l == &vec![1.0]));
}

#[test]
fn coherent_init_rejects_bad_inputs() {
    let f = vec![ONE, ONE];
    assert!(matches!(init_coherent_mps(&f, ONE, &[10, 10], 1e-8, Truncation::exact()), Err(Error::Validation(_))));
    let f = vec![ONE, ZERO];
    match init_coherent_mps(&f, C64::new(2.0, 0.0), &[4, 4], 1e-8, Truncation::exact()) {
        Err(Error::Capacity { site, .. }) => assert_eq!(site, 0),
        other => panic!("expected capacity error, got {other:?}"),
    }
}

#[test]
fn identity_gate_is_a_no_op() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mps = VidalMPS::random(&[3, 3, 3], 3, &mut rng, Truncation::exact()).unwrap();
    let before = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let w = mps.apply_two_site_gate(1, &TwoSiteGate::identity(3, 3)).unwrap();
    assert!(w < 1e-28);
    let after = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let diff = before.iter().zip(&after).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12);
}

#[test]
fn swap_exchanges_product_factors() {
    let psi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO];
    let phi = vec![C64::new(0.0, 1.0), ZERO];
    let mut mps = VidalMPS::product(&[psi.clone(), phi.clone()], Truncation::exact()).unwrap();
    mps.apply_two_site_gate(0, &TwoSiteGate::swap(3, 2)).unwrap();
    assert_eq!(mps.local_dims(), &[2, 3]);
    let expected = VidalMPS::product(&[phi, psi], Truncation::exact()).unwrap();
    assert!((mps.fidelity(&expected).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn beamsplitter_on_single_photon() {
    let d = 3;
    let a = fock::annihilation(d);
    let id = linalg::identity(d);
    let a1 = kron(&a, &id);
    let a2 = kron(&id, &a);
    // exp(π/4 (a1† a2 − a1 a2†))
    let gen = (a1.adjoint() * &a2 - &a1 * a2.adjoint()) * C64::new(0.0, -1.0);
    let u = linalg::exp_i_hermitian(&gen, std::f64::consts::FRAC_PI_4).unwrap();
    let mut mps = VidalMPS::fock(&[d, d], &[1, 0], Truncation::exact()).unwrap();
    mps.apply_two_site_gate(0, &TwoSiteGate::new(d, d, u.clone()).unwrap()).unwrap();
    let out = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let mut e10 = vec![ZERO; d * d];
    e10[d] = ONE;
    let oracle = apply_dense_two_site(&e10, &[d, d], 0, &u);
    for (x, y) in out.iter().zip(&oracle) {
        assert!((x - y).norm() < 1e-12);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert!((out[d].norm() - s).abs() < 1e-12);
    assert!((out[1].norm() - s).abs() < 1e-12);
}

#[test]
fn random_gates_match_dense_and_keep_canonical_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dims = [2, 3, 2, 3];
    let mut mps = VidalMPS::random(&dims, 2, &mut rng, Truncation::exact()).unwrap();
    let mut psi = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    for step in 0..6 {
        let m = step % 3;
        let u = random_unitary(dims[m] * dims[m + 1], &mut rng);
        mps.apply_two_site_gate(m, &TwoSiteGate::new(dims[m], dims[m + 1], u.clone()).unwrap()).unwrap();
        psi = apply_dense_two_site(&psi, &dims, m, &u);
        assert!(mps.canonical_defect() < 1e-10, "defect {}", mps.canonical_defect());
    }
    let out = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let ov: C64 = out.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
    assert!((ov.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn gate_then_inverse_restores_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dims = [3, 3, 3];
    let orig = VidalMPS::random(&dims, 3, &mut rng, Truncation::new(None, 0.0)).unwrap();
    let mut mps = orig.clone();
    let g = TwoSiteGate::new(3, 3, random_unitary(9, &mut rng)).unwrap();
    mps.apply_two_site_gate(1, &g).unwrap();
    mps.apply_two_site_gate(1, &g.adjoint()).unwrap();
    assert!(mps.fidelity(&orig).unwrap() >= 1.0 - 1e-12);
}

#[test]
fn truncation_weight_equals_norm_drop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dims = [3, 3, 3, 3];
    let mut exact = VidalMPS::random(&dims, 4, &mut rng, Truncation::exact()).unwrap();
    let g = TwoSiteGate::new(3, 3, random_unitary(9, &mut rng)).unwrap();
    let mut truncated = exact.clone();
    truncated.truncation = Truncation::new(Some(2), 0.0);
    exact.apply_two_site_gate(1, &g).unwrap();
    let w = truncated.apply_two_site_gate(1, &g).unwrap();
    assert!(w > 0.0);
    // Squared overlap with the exact state equals the kept weight 1 − w.
    let f = truncated.fidelity(&exact).unwrap();
    assert!((f - (1.0 - w)).abs() < 1e-10, "fidelity {f} vs 1-w {}", 1.0 - w);
    assert!((truncated.norm_squared() - 1.0).abs() < 1e-12);
    assert!((truncated.cum_trunc_error() - w).abs() < 1e-15);
    assert!(truncated.bond_dims()[2] <= 2);
}

#[test]
fn expect_mpo_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dims = [3, 2, 3];
    let mps = VidalMPS::random(&dims, 3, &mut rng, Truncation::exact()).unwrap();
    let psi = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let ops: Vec<Option<CMatrix>> = dims
        .iter()
        .map(|&d| Some(CMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>(), rng.random::<f64>()))))
        .collect();
    let mpo = LocalMPO::product(&dims, ops.clone()).unwrap();
    let dense = mpo.to_dense();
    let want = dense_expect(&psi, &dense);
    assert!((mps.expect_mpo(&mpo).unwrap() - want).norm() < 1e-10);
    let sum = LocalMPO::sum_of_local(&dims, &ops).unwrap();
    let want = dense_expect(&psi, &sum.to_dense());
    assert!((mps.expect_mpo(&sum).unwrap() - want).norm() < 1e-10);
    let id = LocalMPO::identity(&dims).unwrap();
    assert!((mps.expect_mpo(&id).unwrap() - ONE).norm() < 1e-10);
}

#[test]
fn g2_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dims = [3, 3, 3];
    let mps = VidalMPS::random(&dims, 3, &mut rng, Truncation::exact()).unwrap();
    let psi = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let a = fock::annihilation(3);
    let id = linalg::identity(3);
    let site_op = |m: usize, op: &CMatrix| {
        let mut acc = CMatrix::from_element(1, 1, ONE);
        for k in 0..3 {
            acc = kron(&acc, if k == m { op } else { &id });
        }
        acc
    };
    for l in 0..3 {
        for m in 0..3 {
            let al = site_op(l, &a);
            let am = site_op(m, &a);
            let num = dense_expect(&psi, &(al.adjoint() * am.adjoint() * &am * &al)).re;
            let nl = dense_expect(&psi, &(al.adjoint() * &al)).re;
            let nm = dense_expect(&psi, &(am.adjoint() * &am)).re;
            let g = mps.g2(l, m).unwrap();
            assert!((g - num / (nl * nm)).abs() < 1e-10);
        }
    }
}

#[test]
fn g2_special_cases() {
    let f = vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)];
    let mps = init_coherent_mps(&f, C64::new(1.2, 0.3), &[16, 16], 1e-10, Truncation::exact()).unwrap();
    for (l, m) in [(0, 0), (0, 1), (1, 1)] {
        assert!((mps.g2(l, m).unwrap() - 1.0).abs() < 1e-6);
    }
    let single = VidalMPS::fock(&[3, 3], &[1, 0], Truncation::exact()).unwrap();
    assert_eq!(single.g2(0, 0).unwrap(), 0.0);
    assert!(matches!(single.g2(0, 1), Err(Error::Undefined(_))));
}

#[test]
fn photon_density_of_coherent_state() {
    let f = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let alpha = C64::new(1.5, 0.0);
    let mps = init_coherent_mps(&f, alpha, &[16, 16], 1e-10, Truncation::exact()).unwrap();
    let dz = 0.5;
    let rho = mps.photon_density(dz);
    for (m, fm) in f.iter().enumerate() {
        assert!((rho[m] - fm.norm_sqr() * alpha.norm_sqr() / dz).abs() < 1e-8);
    }
    let vac = VidalMPS::vacuum(&[4, 4, 4], Truncation::exact()).unwrap();
    assert!(vac.photon_density(1.0).iter().all(|&x| x == 0.0));
}

#[test]
fn dense_round_trip_and_padding() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let dims = [2, 3, 4];
    let mps = VidalMPS::random(&dims, 3, &mut rng, Truncation::exact()).unwrap();
    let psi = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    let back = VidalMPS::from_dense(&dims, &psi, Truncation::exact()).unwrap();
    assert!((back.fidelity(&mps).unwrap() - 1.0).abs() < 1e-12);
    assert!(back.canonical_defect() < 1e-10);

    let mut padded = mps.clone();
    padded.pad_local_dim(1, 5).unwrap();
    assert!(padded.canonical_defect() < 1e-10);
    assert!((padded.total_photon_number() - mps.total_photon_number()).abs() < 1e-12);
    assert!(mps.to_dense_statevector(10).is_err());
}

#[test]
fn one_site_gate_checks_unitarity() {
    let mut mps = VidalMPS::vacuum(&[4], Truncation::exact()).unwrap();
    let phase = fock::phase_diagonal(4, |n| 0.3 * n as f64);
    mps.apply_one_site_gate(0, &phase).unwrap();
    assert!((mps.local_expectation(0, &linalg::identity(4)).unwrap() - ONE).norm() < 1e-15);
    let bad = fock::number(4);
    assert!(matches!(mps.apply_one_site_gate(0, &bad), Err(Error::Validation(_))));
}

#[test]
fn canonicalize_after_nonunitary_ops() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dims = [3, 3, 3, 3];
    let mut mps = VidalMPS::random(&dims, 3, &mut rng, Truncation::exact()).unwrap();
    let psi = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let damp = fock::diagonal(3, |n| (-0.4 * n as f64).exp());
    mps.apply_local_operator_raw(2, &damp).unwrap();
    let n2 = mps.canonicalize().unwrap();
    assert!(mps.canonical_defect() < 1e-10);
    // Dense reference
    let full = kron(&kron(&linalg::identity(9), &damp), &linalg::identity(3));
    let v = full * CMatrix::from_column_slice(psi.len(), 1, &psi);
    let nv = v.norm_squared();
    assert!((n2 - nv).abs() < 1e-12);
    let out = mps.to_dense_statevector(DENSE_LIMIT).unwrap();
    let ov: C64 = out.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    assert!((ov.norm_sqr() / nv - 1.0).abs() < 1e-12);
}

#[test]
fn snapshot_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mps = VidalMPS::random(&[2, 4, 3], 3, &mut rng, Truncation::new(Some(7), 1e-12)).unwrap();
    mps.add_trunc_error(1.5e-9);
    let mut buf = Vec::new();
    snapshot::write_mps(&mps, &mut buf).unwrap();
    let back = snapshot::read_mps(&buf[..]).unwrap();
    assert_eq!(back.local_dims(), mps.local_dims());
    assert_eq!(back.truncation, mps.truncation);
    assert_eq!(back.cum_trunc_error(), mps.cum_trunc_error());
    assert!((back.fidelity(&mps).unwrap() - 1.0).abs() < 1e-12);
    buf[0] = b'X';
    assert!(matches!(snapshot::read_mps(&buf[..]), Err(Error::Format(_))));
}

#[test]
fn number_mpos_match_local_expectations() {
    let f = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let alpha = C64::new(1.1, 0.0);
    let dims = [14, 14];
    let mps = init_coherent_mps(&f, alpha, &dims, 1e-10, Truncation::exact()).unwrap();
    let n1 = mps.expect_mpo(&number_mpo(&dims, 1).unwrap()).unwrap().re;
    assert!((n1 - 0.64 * 1.21).abs() < 1e-8);
    let tot = mps.expect_mpo(&total_number_mpo(&dims).unwrap()).unwrap().re;
    assert!((tot - 1.21).abs() < 1e-8);
    let q = mps.expect_mpo(&charge_mpo(&dims).unwrap()).unwrap().re;
    assert!((q - (0.36 + 2.0 * 0.64) * 1.21).abs() < 1e-8);
    assert!(matches!(charge_mpo(&[3, 3, 3]), Err(Error::Layout(_))));
    assert!(max_abs_diff(&LocalMPO::identity(&[2]).unwrap().to_dense(), &linalg::identity(2)) == 0.0);
}

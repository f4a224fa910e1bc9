mod common;

use common::*;
use nalgebra::DMatrix;
use opennet::gramian::{GramianKind, LyapunovSolver};
use opennet::{
    controllability_gramian, gramian_spectrum, h2_norm, observability_gramian, solve_lyapunov,
    ShiftPolicy, StableSystem,
};
use proptest::prelude::*;

fn check_against_oracles(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<(), TestCaseError> {
    let w = solve_lyapunov(a, q).unwrap();
    let vec = vectorized_lyapunov(a, q);
    let quad = quadrature_gramian(a, q);
    prop_assert!((&w.matrix - &vec).amax() < 1e-6, "vectorized mismatch {}", (&w.matrix - &vec).amax());
    prop_assert!((&w.matrix - &quad).amax() < 1e-6, "quadrature mismatch {}", (&w.matrix - &quad).amax());
    let tol = 1e-8 * (a.norm() * w.matrix.norm() + q.norm());
    prop_assert!(w.residual_norm <= tol);
    let asym = (&w.matrix - w.matrix.transpose()).norm();
    prop_assert!(asym <= 1e-10 * w.matrix.norm());
    let spec = gramian_spectrum(&w).unwrap();
    prop_assert!(spec.last().copied().unwrap() >= -1e-8 * spec[0]);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn schur_vectorized_and_quadrature_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = random_system(&mut r, 8);
        let b = sys.b();
        check_against_oracles(sys.a(), &(b * b.transpose()))?;
    }
}

#[test]
fn random_stable_five_node_matches_quadrature() {
    let mut r = rng(5);
    let a = random_hurwitz(&mut r, 5, 0.7);
    let b = DMatrix::from_fn(5, 2, |i, j| if i == 2 * j { 1.0 } else { 0.0 });
    let q = &b * b.transpose();
    let w = solve_lyapunov(&a, &q).unwrap();
    assert!((&w.matrix - quadrature_gramian(&a, &q)).amax() < 1e-6);
}

#[test]
fn random_three_node_dag_matches_quadrature() {
    let spec = opennet::NetworkSpec::unlabelled(
        3,
        vec![opennet::Edge::new(0, 1, 0.8), opennet::Edge::new(0, 2, 1.7), opennet::Edge::new(1, 2, 0.4)],
    )
    .unwrap()
    .with_roles(vec![0], vec![2])
    .unwrap();
    let sys = StableSystem::from_spec(&spec, ShiftPolicy::Margin(0.6)).unwrap();
    let w = controllability_gramian(&sys).unwrap();
    let b = sys.b();
    assert!((&w.matrix - quadrature_gramian(sys.a(), &(b * b.transpose()))).amax() < 1e-6);
}

#[test]
fn solver_reuse_gives_identical_results() {
    let mut r = rng(11);
    let a = random_hurwitz(&mut r, 7, 1.0);
    let solver = LyapunovSolver::new(&a).unwrap();
    let q = DMatrix::from_fn(7, 7, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
    let once = solver.solve(&q, GramianKind::Controllability).unwrap();
    let again = solver.solve(&q, GramianKind::Controllability).unwrap();
    assert_eq!(once.matrix, again.matrix);
    assert_eq!(once.matrix, solve_lyapunov(&a, &q).unwrap().matrix);
}

#[test]
fn duality_on_random_systems() {
    let mut r = rng(3);
    for _ in 0..30 {
        let sys = random_system(&mut r, 9);
        let wc = controllability_gramian(&sys).unwrap();
        let wo = observability_gramian(&sys).unwrap();
        let lhs = (sys.c() * &wc.matrix * sys.c().transpose()).trace();
        let rhs = (sys.b().transpose() * &wo.matrix * sys.b()).trace();
        assert!(rel_err(lhs, rhs) < 1e-10, "{lhs} vs {rhs}");
    }
}

#[test]
fn chain_table_for_all_orders_and_shifts() {
    for n in 1..=6 {
        for c in [0.5, 1.0, 2.0] {
            let sys = StableSystem::from_spec(&opennet::fixtures::chain(n), ShiftPolicy::Margin(c)).unwrap();
            let h2 = h2_norm(&sys).unwrap().h2_squared;
            let expected = chain_h2_closed_form(n, 1.0, c);
            assert!(rel_err(h2, expected) < 1e-10, "N={n} c={c}: {h2} vs {expected}");
        }
    }
    // closed-form values for N = 1..6
    let table = [1.0 / 2.0, 1.0 / 4.0, 3.0 / 16.0, 5.0 / 32.0, 35.0 / 256.0, 63.0 / 512.0];
    for (k, t) in table.iter().enumerate() {
        assert!(rel_err(chain_h2_closed_form(k + 1, 1.0, 1.0), *t) < 1e-15);
    }
}

#[test]
fn weighted_chain_scales_with_weight_product() {
    let sys = StableSystem::from_spec(&opennet::fixtures::chain_weighted(&[2.0, 0.5, 3.0]), ShiftPolicy::Margin(1.5))
        .unwrap();
    let h2 = h2_norm(&sys).unwrap().h2_squared;
    assert!(rel_err(h2, chain_h2_closed_form(4, 3.0, 1.5)) < 1e-10);
}

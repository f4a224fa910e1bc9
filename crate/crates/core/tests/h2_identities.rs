mod common;

use common::*;
use opennet::frequency::h2_frequency_integral;
use opennet::simulation::impulse_energy;
use opennet::{h2_norm, ShiftPolicy, StableSystem};
use rand::Rng;

#[test]
fn impulse_energy_matches_h2_on_random_systems() {
    let mut r = rng(21);
    for _ in 0..10 {
        let sys = random_system(&mut r, 6);
        let h2 = h2_norm(&sys).unwrap().h2_squared;
        let e = impulse_energy(&sys, None).unwrap();
        assert!(rel_err(e, h2) < 1e-4, "{e} vs {h2}");
    }
}

#[test]
fn frequency_integral_matches_h2_on_random_systems() {
    let mut r = rng(22);
    for _ in 0..10 {
        let sys = random_system(&mut r, 6);
        let h2 = h2_norm(&sys).unwrap().h2_squared;
        let f = h2_frequency_integral(&sys).unwrap();
        assert!(rel_err(f, h2) < 1e-3, "{f} vs {h2}");
    }
}

#[test]
fn chain_three_all_routes() {
    let sys = StableSystem::from_spec(&opennet::fixtures::chain(3), ShiftPolicy::Margin(1.0)).unwrap();
    let h2 = h2_norm(&sys).unwrap().h2_squared;
    assert!(rel_err(impulse_energy(&sys, None).unwrap(), h2) < 1e-4);
    assert!(rel_err(h2_frequency_integral(&sys).unwrap(), h2) < 1e-3);
}

#[test]
fn additivity_over_disjoint_sets() {
    let mut r = rng(23);
    for _ in 0..50 {
        let sys = random_system(&mut r, 9);
        let n = sys.dim();
        let perm = random_subset(&mut r, n, n);
        let split = r.random_range(1..n);
        let (s1, s2) = (perm[..split].to_vec(), perm[split..].to_vec());

        let f_in = |inputs: Vec<usize>| h2_norm(&sys.with_inputs(inputs).unwrap()).unwrap().h2_squared;
        let all: Vec<usize> = (0..n).collect();
        let joint = f_in(all.clone());
        assert!(rel_err(f_in(s1.clone()) + f_in(s2.clone()), joint) < 1e-12);

        let f_out = |outputs: Vec<usize>| h2_norm(&sys.with_outputs(outputs).unwrap()).unwrap().h2_squared;
        let joint = f_out(all);
        assert!(rel_err(f_out(s1) + f_out(s2), joint) < 1e-12);
    }
}

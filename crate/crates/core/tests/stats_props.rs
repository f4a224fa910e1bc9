mod common;

use common::*;
use opennet::stats::{sample_from_contributions, sample_subset};
use opennet::{
    h2_norm, input_contributions, sample_trace_distribution, score_empirical_choice, Thresholds,
};
use proptest::prelude::*;

#[test]
fn sample_mean_matches_exact_expectation() {
    let mut r = rng(51);
    let sys = random_network_system(&mut r, 8, 0.4);
    let contrib = input_contributions(&sys).unwrap();
    let m = 3;
    let samples = sample_trace_distribution(&sys, m, 10_000, 99).unwrap();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let exact = m as f64 / 8.0 * contrib.total();
    assert!((mean - exact).abs() < 3.0 * std / n.sqrt(), "{mean} vs {exact}");
}

#[test]
fn samples_are_subset_sums_and_match_direct_solves() {
    let mut r = rng(52);
    let sys = random_network_system(&mut r, 9, 0.3);
    let contrib = input_contributions(&sys).unwrap();
    let (m, seed) = (4, 7);
    let samples = sample_from_contributions(&contrib, m, 200, seed).unwrap();
    for (k, v) in samples.iter().enumerate() {
        let subset = sample_subset(9, m, seed, k as u64);
        let direct_sum: f64 = subset.iter().map(|&i| contrib.values[i]).sum();
        assert!(rel_err(*v, direct_sum) < 1e-12);
        if k < 10 {
            let solved = h2_norm(&sys.with_inputs(subset).unwrap()).unwrap().h2_squared;
            assert!(rel_err(*v, solved) < 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn z_score_is_affine_invariant(
        values in proptest::collection::vec(-10.0f64..10.0, 3..60),
        x in -12.0f64..12.0,
        shift in -100.0f64..100.0,
        scale in 0.01f64..100.0,
    ) {
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-3);
        let t = Thresholds::default();
        let base = score_empirical_choice(values.clone(), x, &t).unwrap();
        let moved = score_empirical_choice(values.iter().map(|v| v + shift).collect(), x + shift, &t).unwrap();
        let scaled = score_empirical_choice(values.iter().map(|v| v * scale).collect(), x * scale, &t).unwrap();
        prop_assert!((base.z_score - moved.z_score).abs() <= 1e-8 * (1.0 + base.z_score.abs()));
        prop_assert!((base.z_score - scaled.z_score).abs() <= 1e-9 * (1.0 + base.z_score.abs()));
        prop_assert!((0.0..=0.5).contains(&base.p_value_two_sided));
        prop_assert!((0.0..0.5).contains(&base.p_value_mod));
        prop_assert!(base.std >= 0.0);
    }
}

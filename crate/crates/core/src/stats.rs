//! Monte-Carlo scoring of an empirical input set against random input sets
//! of the same size.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramian::controllability_gramian;
use crate::network::{StableSystem, StructuralReport};
use crate::selection::{input_contributions, ContributionVector};

/// Sample spread below `DEGENERATE_SPREAD·|mean|` is treated as zero.
pub const DEGENERATE_SPREAD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Two-sided p-value below which a set is significant.
    pub p_value: f64,
    /// Minimum |z| for a significant set.
    pub z_score: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { p_value: 0.05, z_score: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Passing,
    Blocking,
    Typical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub sample_values: Vec<f64>,
    pub x_real: f64,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub z_score: f64,
    /// Empirical CDF at `x_real`, midpoint rank for ties.
    pub cdf: f64,
    /// `cdf mod 0.5`.
    pub p_value_mod: f64,
    /// `min(cdf, 1 − cdf)`.
    pub p_value_two_sided: f64,
    pub classification: Classification,
    pub seed: Option<u64>,
    pub n_samples: usize,
}

/// Random `m`-subsets of the nodes scored by the system's input contributions.
pub fn sample_trace_distribution(sys: &StableSystem, m: usize, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    sample_from_contributions(&input_contributions(sys)?, m, n_samples, seed)
}

/// Node subset used by sample `index` for a given seed.
pub fn sample_subset(n: usize, m: usize, seed: u64, sample: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    let mut subset = index::sample(&mut rng, n, m).into_vec();
    subset.sort_unstable();
    subset
}

/// Sums of `m` distinct contributions over `n_samples` uniform subsets.
///
/// Sample `k` draws from its own ChaCha stream `k` under `seed`, so the
/// output is independent of thread count and scheduling.
pub fn sample_from_contributions(
    contrib: &ContributionVector,
    m: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = contrib.values.len();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("subset size m = {m} must lie in 1..={n}")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n_samples}")));
    }
    let mut out = Vec::with_capacity(n_samples);
    (0..n_samples)
        .into_par_iter()
        .map(|k| contrib.subset_value(&sample_subset(n, m, seed, k as u64)))
        .collect_into_vec(&mut out);
    Ok(out)
}

/// z-score, empirical p-values and classification of `x_real`.
pub fn score_empirical_choice(
    sample_values: Vec<f64>,
    x_real: f64,
    thresholds: &Thresholds,
) -> Result<SampleStats> {
    let n = sample_values.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    if !x_real.is_finite() || sample_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let constant = sample_values.iter().all(|&v| v == sample_values[0]);
    let (mean, std) = if constant {
        (sample_values[0], 0.0)
    } else {
        let mean = sample_values.iter().sum::<f64>() / n as f64;
        let var = sample_values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        (mean, var.sqrt())
    };

    let (z_score, cdf) = if std <= DEGENERATE_SPREAD * mean.abs() || std == 0.0 {
        let slack = 1e3 * DEGENERATE_SPREAD * mean.abs();
        if (x_real - mean).abs() > slack {
            return Err(Error::DegenerateDistribution { observed: x_real, mean });
        }
        (0.0, 0.5)
    } else {
        let less = sample_values.iter().filter(|&&v| v < x_real).count() as f64;
        let equal = sample_values.iter().filter(|&&v| v == x_real).count() as f64;
        ((x_real - mean) / std, (less + 0.5 * equal) / n as f64)
    };
    let p_value_mod = cdf % 0.5;
    let p_value_two_sided = cdf.min(1.0 - cdf);
    let significant = p_value_two_sided < thresholds.p_value;
    let classification = if significant && z_score > thresholds.z_score {
        Classification::Passing
    } else if significant && z_score < -thresholds.z_score {
        Classification::Blocking
    } else {
        Classification::Typical
    };
    Ok(SampleStats {
        sample_values,
        x_real,
        mean,
        std,
        z_score,
        cdf,
        p_value_mod,
        p_value_two_sided,
        classification,
        seed: None,
        n_samples: n,
    })
}

/// Full protocol: scores `real_inputs` against `n_samples` random input sets
/// of the same size, with the system's outputs held fixed.
pub fn empirical_test(
    sys: &StableSystem,
    real_inputs: &[usize],
    n_samples: usize,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<SampleStats> {
    let contrib = input_contributions(sys)?;
    empirical_test_with(&contrib, real_inputs, n_samples, seed, thresholds)
}

pub fn empirical_test_with(
    contrib: &ContributionVector,
    real_inputs: &[usize],
    n_samples: usize,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<SampleStats> {
    let n = contrib.values.len();
    let mut seen = vec![false; n];
    for &v in real_inputs {
        if v >= n {
            return Err(Error::NodeOutOfRange { side: crate::Side::Input, node: v, nodes: n });
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::DuplicateNode { side: crate::Side::Input, node: v });
        }
    }
    let samples = sample_from_contributions(contrib, real_inputs.len(), n_samples, seed)?;
    let mut stats = score_empirical_choice(samples, contrib.subset_value(real_inputs), thresholds)?;
    stats.seed = Some(seed);
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HenriciTracePoint {
    pub henrici_index: f64,
    /// `Tr(W_c)/N²` with every node an input.
    pub normalized_trace: f64,
}

/// Non-normality against normalized Gramian trace, with `B = I`.
pub fn trace_vs_henrici(report: &StructuralReport, sys: &StableSystem) -> Result<HenriciTracePoint> {
    let n = sys.dim();
    let full = sys.with_inputs((0..n).collect())?;
    let trace = controllability_gramian(&full)?.trace();
    Ok(HenriciTracePoint {
        henrici_index: report.henrici_index,
        normalized_trace: trace / (n * n) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Side;
    use crate::fixtures;
    use crate::network::{structural_report, NetworkSpec, ShiftPolicy};

    fn cv(values: Vec<f64>) -> ContributionVector {
        ContributionVector { values, basis: Side::Input, fixed_set: vec![] }
    }

    #[test]
    fn full_subset_is_degenerate_and_typical() {
        let c = cv(vec![0.3, 0.1, 0.7, 0.2]);
        let s = sample_from_contributions(&c, 4, 50, 1).unwrap();
        assert!(s.iter().all(|&v| v == s[0]));
        let stats = score_empirical_choice(s, c.total(), &Thresholds::default()).unwrap();
        assert_eq!(stats.std, 0.0);
        assert_eq!(stats.z_score, 0.0);
        assert_eq!(stats.classification, Classification::Typical);
        assert!(matches!(
            score_empirical_choice(vec![1.0; 5], 2.0, &Thresholds::default()),
            Err(Error::DegenerateDistribution { .. })
        ));
    }

    #[test]
    fn scaled_identity_samples_are_constant() {
        let spec = NetworkSpec::unlabelled(6, vec![]).unwrap();
        let sys = StableSystem::from_spec(&spec, ShiftPolicy::Margin(1000.0)).unwrap();
        for m in 1..=6 {
            for v in sample_trace_distribution(&sys, m, 20, 9).unwrap() {
                assert!((v - m as f64 / 2000.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn subsets_are_distinct_sorted_and_seeded() {
        for k in 0..200 {
            let s = sample_subset(10, 4, 42, k);
            assert_eq!(s.len(), 4);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(s, sample_subset(10, 4, 42, k));
        }
        assert_ne!(
            (0..20).map(|k| sample_subset(10, 4, 42, k)).collect::<Vec<_>>(),
            (0..20).map(|k| sample_subset(10, 4, 43, k)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn thread_count_does_not_change_samples() {
        let c = cv((0..15).map(|i| 1.0 / (1.0 + i as f64)).collect());
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_from_contributions(&c, 5, 3000, 77).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    #[test]
    fn mean_and_extreme_rank() {
        let samples: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let at_mean = score_empirical_choice(samples.clone(), 4.5, &Thresholds::default()).unwrap();
        assert_eq!(at_mean.z_score, 0.0);
        assert_eq!(at_mean.classification, Classification::Typical);

        let top = score_empirical_choice(samples.clone(), 100.0, &Thresholds::default()).unwrap();
        assert_eq!(top.cdf, 1.0);
        assert_eq!(top.p_value_mod, 0.0);
        assert_eq!(top.p_value_two_sided, 0.0);
        assert_eq!(top.classification, Classification::Passing);

        let bottom = score_empirical_choice(samples, -100.0, &Thresholds::default()).unwrap();
        assert_eq!(bottom.classification, Classification::Blocking);
    }

    #[test]
    fn midpoint_ties() {
        let s = score_empirical_choice(vec![1.0, 2.0, 2.0, 3.0], 2.0, &Thresholds::default()).unwrap();
        assert_eq!(s.cdf, 0.5);
        assert_eq!(s.p_value_two_sided, 0.5);
        assert_eq!(s.p_value_mod, 0.0);
    }

    #[test]
    fn sources_of_layered_dag_pass_and_ring_is_typical() {
        let dag = StableSystem::from_spec(&fixtures::layered_dag(), ShiftPolicy::Normalize).unwrap();
        let s = empirical_test(&dag, &[0, 1], 10_000, 2024, &Thresholds::default()).unwrap();
        assert_eq!(s.classification, Classification::Passing, "z = {}, p = {}", s.z_score, s.p_value_two_sided);

        let ring = StableSystem::from_spec(&fixtures::ring(12), ShiftPolicy::Normalize).unwrap();
        let s = empirical_test(&ring, &[0, 6], 10_000, 2024, &Thresholds::default()).unwrap();
        assert_eq!(s.classification, Classification::Typical);
    }

    #[test]
    fn chain_outweighs_star_in_normalized_trace() {
        let chain = fixtures::chain(5);
        let star = fixtures::star(5);
        let point = |spec: &NetworkSpec| {
            let sys = StableSystem::from_spec(spec, ShiftPolicy::Margin(1.0)).unwrap();
            trace_vs_henrici(&structural_report(spec).unwrap(), &sys).unwrap()
        };
        let (pc, ps) = (point(&chain), point(&star));
        assert!((pc.henrici_index - 1.0).abs() < 1e-12);
        assert!(pc.normalized_trace > ps.normalized_trace);
        // closed forms: chain Σ_o Σ_{k≤o} h_k, star 1/2 + 4·(1/2 + 1/4)
        assert!((ps.normalized_trace - 3.5 / 25.0).abs() < 1e-14);

        let ring = fixtures::ring(6);
        assert!(point(&ring).henrici_index.abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_sizes() {
        let c = cv(vec![1.0, 2.0]);
        assert!(sample_from_contributions(&c, 0, 10, 0).is_err());
        assert!(sample_from_contributions(&c, 3, 10, 0).is_err());
        assert!(sample_from_contributions(&c, 1, 1, 0).is_err());
        assert!(empirical_test_with(&c, &[0, 0], 10, 0, &Thresholds::default()).is_err());
    }
}

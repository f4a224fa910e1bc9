//! Per-node contributions to `Tr(C W_c Cᵀ)` and optimal node sets.
//!
//! The squared H₂-norm is additive over input nodes for a fixed output set,
//! and over output nodes for a fixed input set. Ranking single-node
//! contributions therefore solves the best-k-subset problem exactly.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::gramian::{GramianKind, LyapunovSolver};
use crate::network::StableSystem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContributionVector {
    /// `values[v]`: H₂² obtained when node `v` alone is on the ranked side.
    pub values: Vec<f64>,
    /// The side being ranked.
    pub basis: Side,
    /// Node set held fixed on the other side.
    pub fixed_set: Vec<usize>,
}

impl ContributionVector {
    /// H₂² of a node set on the ranked side, summed in ascending node order.
    pub fn subset_value(&self, subset: &[usize]) -> f64 {
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.iter().map(|&v| self.values[v]).sum()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Maximize,
    Minimize,
}

/// Contribution of every node as an input, for the system's output set.
///
/// One dual solve `Aᵀ W_o + W_o A + CᵀC = 0`; `values[i] = [W_o]_{ii}`.
pub fn input_contributions(sys: &StableSystem) -> Result<ContributionVector> {
    let c = sys.c();
    let wo = LyapunovSolver::new(&sys.a().transpose())?.solve(&(c.transpose() * c), GramianKind::Observability)?;
    Ok(ContributionVector {
        values: wo.matrix.diagonal().iter().map(|v| v.max(0.0)).collect(),
        basis: Side::Input,
        fixed_set: sys.outputs().to_vec(),
    })
}

/// Contribution of every node as an output, for the system's input set:
/// `values[o] = [W_c]_{oo}`.
pub fn output_contributions(sys: &StableSystem) -> Result<ContributionVector> {
    let b = sys.b();
    let wc = LyapunovSolver::new(sys.a())?.solve(&(b * b.transpose()), GramianKind::Controllability)?;
    Ok(ContributionVector {
        values: wc.matrix.diagonal().iter().map(|v| v.max(0.0)).collect(),
        basis: Side::Output,
        fixed_set: sys.inputs().to_vec(),
    })
}

/// The `k` best nodes; ties go to the smaller index.
pub fn top_k(contrib: &ContributionVector, k: usize, direction: Direction) -> Result<Vec<usize>> {
    let n = contrib.values.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let v = &contrib.values;
    idx.sort_by(|&a, &b| {
        let ord = match direction {
            Direction::Maximize => v[b].total_cmp(&v[a]),
            Direction::Minimize => v[a].total_cmp(&v[b]),
        };
        ord.then(a.cmp(&b))
    });
    idx.truncate(k);
    Ok(idx)
}

type CacheMap = HashMap<(Side, Vec<usize>), Arc<ContributionVector>>;

/// Contribution vectors of one system, memoized by ranked side and fixed set.
///
/// Readers share computed vectors through `Arc`; a missing entry is computed
/// outside the lock and inserted once.
#[derive(Debug)]
pub struct ContributionCache {
    sys: StableSystem,
    entries: RwLock<CacheMap>,
}

impl ContributionCache {
    pub fn new(sys: StableSystem) -> Self {
        ContributionCache { sys, entries: RwLock::new(HashMap::new()) }
    }

    pub fn system(&self) -> &StableSystem {
        &self.sys
    }

    /// Contributions of nodes on side `basis` with `fixed` on the other side.
    pub fn get(&self, basis: Side, fixed: &[usize]) -> Result<Arc<ContributionVector>> {
        let key = (basis, fixed.to_vec());
        if let Some(hit) = self.entries.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let computed = Arc::new(match basis {
            Side::Input => input_contributions(&self.sys.with_outputs(fixed.to_vec())?)?,
            Side::Output => output_contributions(&self.sys.with_inputs(fixed.to_vec())?)?,
        });
        let mut map = self.entries.write().expect("cache lock poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(computed)))
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gramian::h2_norm;
    use crate::network::{NetworkSpec, ShiftPolicy};

    #[test]
    fn scaled_identity_contributions() {
        let spec = NetworkSpec::unlabelled(4, vec![]).unwrap();
        let sys = StableSystem::from_spec(&spec, ShiftPolicy::Margin(1000.0)).unwrap();
        for v in input_contributions(&sys).unwrap().values {
            assert!((v - 1.0 / 2000.0).abs() < 1e-18);
        }
        for v in output_contributions(&sys).unwrap().values {
            assert!((v - 1.0 / 2000.0).abs() < 1e-18);
        }
    }

    #[test]
    fn chain_input_contributions_follow_hop_count() {
        // input k hops upstream of the output behaves like a (k+1)-node chain
        let n = 5;
        let c = 1.0;
        let sys = StableSystem::from_spec(&fixtures::chain(n), ShiftPolicy::Margin(c)).unwrap();
        let contrib = input_contributions(&sys).unwrap();
        let table = [1.0 / 2.0, 1.0 / 4.0, 3.0 / 16.0, 5.0 / 32.0, 35.0 / 256.0];
        for i in 0..n {
            let hops = n - 1 - i;
            assert!((contrib.values[i] - table[hops]).abs() < 1e-13, "node {i}");
        }
        assert_eq!(top_k(&contrib, 1, Direction::Maximize).unwrap(), vec![n - 1]);
        let all: Vec<usize> = (0..n).collect();
        let full = h2_norm(&sys.with_inputs(all.clone()).unwrap()).unwrap().h2_squared;
        assert!((contrib.subset_value(&all) - full).abs() <= 1e-12 * full);
    }

    #[test]
    fn chain_output_contributions_match_table() {
        let sys = StableSystem::from_spec(&fixtures::chain(6), ShiftPolicy::Margin(1.0)).unwrap();
        let contrib = output_contributions(&sys).unwrap();
        let table = [1.0 / 2.0, 1.0 / 4.0, 3.0 / 16.0, 5.0 / 32.0, 35.0 / 256.0, 63.0 / 512.0];
        for o in 0..6 {
            assert!((contrib.values[o] - table[o]).abs() < 1e-13);
        }
        let trace = crate::gramian::controllability_gramian(&sys).unwrap().trace();
        assert!((contrib.total() - trace).abs() <= 1e-13 * trace);
    }

    #[test]
    fn ties_and_range() {
        let cv = ContributionVector { values: vec![1.0; 5], basis: Side::Input, fixed_set: vec![0] };
        assert_eq!(top_k(&cv, 3, Direction::Maximize).unwrap(), vec![0, 1, 2]);
        assert_eq!(top_k(&cv, 2, Direction::Minimize).unwrap(), vec![0, 1]);
        assert!(top_k(&cv, 0, Direction::Maximize).is_err());
        assert!(top_k(&cv, 6, Direction::Maximize).is_err());
        let cv = ContributionVector { values: vec![0.3, 0.1, 0.5, 0.1], basis: Side::Input, fixed_set: vec![] };
        assert_eq!(top_k(&cv, 2, Direction::Maximize).unwrap(), vec![2, 0]);
        assert_eq!(top_k(&cv, 3, Direction::Minimize).unwrap(), vec![1, 3, 0]);
    }

    #[test]
    fn cache_reuses_entries() {
        let sys = StableSystem::from_spec(&fixtures::feedback_network(), ShiftPolicy::Normalize).unwrap();
        let cache = ContributionCache::new(sys);
        let a = cache.get(Side::Input, &[4]).unwrap();
        let b = cache.get(Side::Input, &[4]).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.get(Side::Output, &[0]).unwrap();
        assert_eq!(cache.len(), 2);
    }
}

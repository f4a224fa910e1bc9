//! DC gains of acyclic networks as sums over directed paths.
//!
//! For a DAG with strictly negative diagonal (leaks) and non-negative edges,
//! each entry of the inverse is a sum over the directed paths `i → j`:
//!
//! `[A⁻¹]_{ji} = −Σ_π (Π_{k→l ∈ π} A_{lk} / |A_{kk}|) · 1/|A_{jj}|`
//!
//! so every route contributes its edge gains discounted by the leak at each
//! node it leaves, plus the leak at the destination.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequency::NodePair;
use crate::graph::Digraph;
use crate::network::{NetworkSpec, StableSystem};

pub const DEFAULT_MAX_PATHS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathGainTerm {
    /// Node sequence from the input to the output.
    pub path: Vec<usize>,
    /// Signed contribution of this path to `[A⁻¹]_{ji}`.
    pub term_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DagEntry {
    pub value: f64,
    pub terms: Vec<PathGainTerm>,
}

/// Every simple directed path from `from` to `to` in lexicographic order.
pub fn enumerate_paths(
    spec: &NetworkSpec,
    from: usize,
    to: usize,
    max_paths: usize,
) -> Result<Vec<Vec<usize>>> {
    let n = spec.node_count();
    for node in [from, to] {
        if node >= n {
            return Err(Error::InvalidArgument(format!("node {node} out of range for {n} nodes")));
        }
    }
    paths_in(&spec.digraph(), from, to, max_paths)
}

fn paths_in(g: &Digraph, from: usize, to: usize, max_paths: usize) -> Result<Vec<Vec<usize>>> {
    let order = g.topological_order().ok_or(Error::NotADag)?;

    // path counts to `to`, accumulated in reverse topological order
    let mut count = vec![0.0f64; g.node_count()];
    count[to] = 1.0;
    for &v in order.iter().rev() {
        if v != to {
            count[v] = g.successors(v).iter().map(|&s| count[s]).sum();
        }
    }
    if count[from] > max_paths as f64 {
        return Err(Error::PathExplosion { count: count[from], limit: max_paths });
    }

    let mut out = Vec::with_capacity(count[from] as usize);
    let mut path = vec![from];
    // (node, next successor position)
    let mut stack = vec![(from, 0usize)];
    while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
        if v == to {
            out.push(path.clone());
            stack.pop();
            path.pop();
            continue;
        }
        match g.successors(v).get(*pos) {
            Some(&s) => {
                *pos += 1;
                if count[s] > 0.0 {
                    stack.push((s, 0));
                    path.push(s);
                }
            }
            None => {
                stack.pop();
                path.pop();
            }
        }
    }
    Ok(out)
}

/// `[A⁻¹]_{out,in}` of an acyclic system with its per-path decomposition.
pub fn dag_dc_entry(sys: &StableSystem, pair: NodePair) -> Result<DagEntry> {
    dag_dc_entry_with_limit(sys, pair, DEFAULT_MAX_PATHS)
}

pub fn dag_dc_entry_with_limit(sys: &StableSystem, pair: NodePair, max_paths: usize) -> Result<DagEntry> {
    let a = sys.a();
    let n = a.nrows();
    if pair.input >= n || pair.output >= n {
        return Err(Error::InvalidArgument(format!("pair {pair:?} out of range for {n} nodes")));
    }
    for j in 0..n {
        if !(a[(j, j)] < 0.0) {
            return Err(Error::ZeroLeak(j));
        }
        for i in 0..n {
            if i != j && a[(i, j)] < 0.0 {
                return Err(Error::NegativeEdgeGain { row: i, col: j, value: a[(i, j)] });
            }
        }
    }
    let paths = paths_in(&Digraph::from_matrix(a), pair.input, pair.output, max_paths)?;
    let tail = 1.0 / a[(pair.output, pair.output)].abs();
    let terms: Vec<PathGainTerm> = paths
        .into_iter()
        .map(|path| {
            let gain: f64 = path
                .windows(2)
                .map(|e| a[(e[1], e[0])] / a[(e[0], e[0])].abs())
                .product();
            PathGainTerm { term_value: -gain * tail, path }
        })
        .collect();
    let value = terms.iter().map(|t| t.term_value).sum();
    Ok(DagEntry { value, terms })
}

/// The `k` terms of largest magnitude; ties keep lexicographic path order.
pub fn dominant_paths(terms: &[PathGainTerm], k: usize) -> Vec<PathGainTerm> {
    let mut sorted = terms.to_vec();
    sorted.sort_by(|x, y| {
        y.term_value
            .abs()
            .total_cmp(&x.term_value.abs())
            .then_with(|| x.path.cmp(&y.path))
    });
    sorted.truncate(k);
    sorted
}

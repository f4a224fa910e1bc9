//! Structural (unweighted) view of a network: successor lists without
//! self-loops or zero-weight edges.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use nalgebra::DMatrix;

/// Directed graph as sorted, deduplicated successor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    succ: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut succ = vec![Vec::new(); n];
        for (s, t) in edges {
            if s != t {
                succ[s].push(t);
            }
        }
        for list in &mut succ {
            list.sort_unstable();
            list.dedup();
        }
        Digraph { succ }
    }

    /// Edge `j -> i` for every nonzero off-diagonal entry `a[i][j]`.
    pub fn from_matrix(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        Self::from_edges(
            n,
            (0..n).flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i)))
                .filter(|&(j, i)| a[(i, j)] != 0.0),
        )
    }

    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    /// Kahn's algorithm, always releasing the smallest ready index first so
    /// the order is deterministic. `None` if a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.node_count();
        let mut indeg = vec![0usize; n];
        for list in &self.succ {
            for &t in list {
                indeg[t] += 1;
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &t in &self.succ[v] {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    ready.push(Reverse(t));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Breadth-first hop distances from `from`; `None` marks unreachable.
    pub fn hop_distances(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &t in &self.succ[v] {
                if dist[t].is_none() {
                    dist[t] = Some(d + 1);
                    queue.push_back(t);
                }
            }
        }
        dist
    }

    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.hop_distances(from)[to].is_some()
    }
}

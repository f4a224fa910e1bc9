//! Small reference networks used by the tests, the acceptance suite and the
//! bundled `fixtures/` directory.

use crate::network::{Edge, NetworkSpec};

fn labelled(labels: &[&str], edges: &[(usize, usize, f64)], inputs: &[usize], outputs: &[usize]) -> NetworkSpec {
    NetworkSpec::new(
        labels.iter().map(|s| s.to_string()).collect(),
        edges.iter().map(|&(s, t, w)| Edge::new(s, t, w)).collect(),
        inputs.to_vec(),
        outputs.to_vec(),
    )
    .expect("fixture networks are valid")
}

/// Unidirectional chain `1 -> 2 -> ... -> N` with unit weights; input is
/// node 1 and output node N.
pub fn chain(n: usize) -> NetworkSpec {
    chain_weighted(&vec![1.0; n.saturating_sub(1)])
}

/// Chain with weights `w_1..w_{N-1}` (N = weights.len() + 1).
pub fn chain_weighted(weights: &[f64]) -> NetworkSpec {
    let n = weights.len() + 1;
    let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let edges = weights
        .iter()
        .enumerate()
        .map(|(k, &w)| Edge::new(k, k + 1, w))
        .collect();
    NetworkSpec::new(labels, edges, vec![0], vec![n - 1]).expect("chain is valid")
}

/// Five-node DAG with three paths from node 1 to node 5:
/// (1,2,4,5), (1,2,3,4,5), (1,3,4,5).
pub fn braided_dag() -> NetworkSpec {
    braided_dag_weighted([1.0; 6])
}

/// Same topology with weights for 1→2, 1→3, 2→3, 2→4, 3→4, 4→5.
pub fn braided_dag_weighted(w: [f64; 6]) -> NetworkSpec {
    labelled(
        &["1", "2", "3", "4", "5"],
        &[(0, 1, w[0]), (0, 2, w[1]), (1, 2, w[2]), (1, 3, w[3]), (2, 3, w[4]), (3, 4, w[5])],
        &[0],
        &[4],
    )
}

/// Weighted cyclic network whose unweighted shortest input→output route is
/// `input -> n2 -> output` (d = 2), while the cheapest route with weights as
/// lengths detours through n4 first. Normalized to spectral abscissa −1 its
/// magnitude corners at ω ≈ 1.
pub fn feedback_network() -> NetworkSpec {
    labelled(
        &["input", "n2", "n3", "n4", "output"],
        &[
            (0, 1, 5.0),
            (0, 3, 1.0),
            (3, 1, 1.0),
            (1, 4, 1.0),
            (1, 0, 1.0),
            (3, 2, 5.0),
            (4, 2, 1.0),
            (2, 0, 2.0),
            (1, 3, 5.0),
            (4, 3, 3.0),
        ],
        &[0],
        &[4],
    )
}

/// Hub with `n - 1` leaves, unit weights; hub is the input, every node an output.
pub fn star(n: usize) -> NetworkSpec {
    let labels: Vec<String> = std::iter::once("hub".to_string())
        .chain((1..n).map(|i| format!("leaf{i}")))
        .collect();
    let edges = (1..n).map(|i| Edge::new(0, i, 1.0)).collect();
    NetworkSpec::new(labels, edges, vec![0], (0..n).collect()).expect("star is valid")
}

/// Undirected (symmetric) unit-weight ring; inputs are nodes 0 and n/2,
/// every node is an output.
pub fn ring(n: usize) -> NetworkSpec {
    let labels: Vec<String> = (0..n).map(|i| format!("r{i}")).collect();
    let edges = (0..n)
        .flat_map(|i| [Edge::new(i, (i + 1) % n, 1.0), Edge::new((i + 1) % n, i, 1.0)])
        .collect();
    NetworkSpec::new(labels, edges, vec![0, n / 2], (0..n).collect()).expect("ring is valid")
}

/// Twelve-node layered unit-weight DAG: two sources feed five successive
/// layers of two nodes, each node linked to both nodes of the next layer.
/// The sources are the inputs; every node is an output.
pub fn layered_dag() -> NetworkSpec {
    let labels: Vec<String> = (0..12).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for layer in 0..5 {
        for a in 0..2 {
            for b in 0..2 {
                edges.push(Edge::new(2 * layer + a, 2 * layer + 2 + b, 1.0));
            }
        }
    }
    NetworkSpec::new(labels, edges, vec![0, 1], (0..12).collect()).expect("layered DAG is valid")
}

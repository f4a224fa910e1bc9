//! Network description, system matrices and purely structural quantities.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::graph::Digraph;
use crate::linalg;

/// A weighted directed edge `source -> target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(source: usize, target: usize, weight: f64) -> Self {
        Edge { source, target, weight }
    }
}

/// Directed weighted network with designated input and output nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    node_ids: Vec<String>,
    edges: Vec<Edge>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl NetworkSpec {
    pub fn new(
        node_ids: Vec<String>,
        edges: Vec<Edge>,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(node_ids.len());
        for id in &node_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateLabel(id.clone()));
            }
        }
        let n = node_ids.len();
        for (k, e) in edges.iter().enumerate() {
            for node in [e.source, e.target] {
                if node >= n {
                    return Err(Error::EndpointOutOfRange { edge: k, node, nodes: n });
                }
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::InvalidWeight { edge: k, weight: e.weight });
            }
        }
        validate_node_set(Side::Input, &inputs, n)?;
        validate_node_set(Side::Output, &outputs, n)?;
        Ok(NetworkSpec { node_ids, edges, inputs, outputs })
    }

    /// Nodes labelled `0..n` with every node as both input and output.
    pub fn unlabelled(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let all: Vec<usize> = (0..n).collect();
        Self::new((0..n).map(|i| i.to_string()).collect(), edges, all.clone(), all)
    }

    pub fn with_roles(&self, inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        Self::new(self.node_ids.clone(), self.edges.clone(), inputs, outputs)
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.node_ids.iter().position(|id| id == label)
    }

    pub fn label(&self, node: usize) -> &str {
        &self.node_ids[node]
    }

    /// Raw adjacency `A₀`, see [`build_adjacency`].
    pub fn adjacency(&self) -> DMatrix<f64> {
        build_adjacency(self)
    }

    /// Unweighted structure: positive-weight edges, self-loops removed.
    pub fn digraph(&self) -> Digraph {
        Digraph::from_edges(
            self.node_count(),
            self.edges
                .iter()
                .filter(|e| e.weight > 0.0)
                .map(|e| (e.source, e.target)),
        )
    }
}

fn validate_node_set(side: Side, nodes: &[usize], n: usize) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet(side));
    }
    let mut seen = HashSet::with_capacity(nodes.len());
    for &node in nodes {
        if node >= n {
            return Err(Error::NodeOutOfRange { side, node, nodes: n });
        }
        if !seen.insert(node) {
            return Err(Error::DuplicateNode { side, node });
        }
    }
    Ok(())
}

/// `A₀[i][j]` is the total weight of edges `j -> i`; self-loops land on the
/// diagonal and parallel edges are summed.
pub fn build_adjacency(spec: &NetworkSpec) -> DMatrix<f64> {
    let n = spec.node_count();
    let mut a = DMatrix::zeros(n, n);
    for e in spec.edges() {
        a[(e.target, e.source)] += e.weight;
    }
    a
}

/// How far the spectrum is moved into the left half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "margin")]
pub enum ShiftPolicy {
    /// Spectral abscissa becomes exactly −1.
    #[default]
    Normalize,
    /// Spectral abscissa becomes −margin.
    Margin(f64),
}

impl ShiftPolicy {
    pub fn margin(&self) -> f64 {
        match *self {
            ShiftPolicy::Normalize => 1.0,
            ShiftPolicy::Margin(m) => m,
        }
    }
}

/// Result of [`stabilize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Shifted {
    pub a_matrix: DMatrix<f64>,
    pub shift_c: f64,
    pub spectral_abscissa: f64,
}

/// Applies `A ← A₀ − cI` with `c = max Re λ(A₀) + margin`.
pub fn stabilize(a0: &DMatrix<f64>, policy: ShiftPolicy) -> Result<Shifted> {
    linalg::ensure_square(a0, "adjacency matrix")?;
    linalg::ensure_finite(a0)?;
    let margin = policy.margin();
    if !(margin.is_finite() && margin > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "shift margin must be positive, got {margin}"
        )));
    }
    let lambda_max = linalg::spectral_abscissa(a0)?;
    let shift_c = lambda_max + margin;
    let n = a0.nrows();
    let a_matrix = a0 - DMatrix::<f64>::identity(n, n) * shift_c;
    Ok(Shifted { a_matrix, shift_c, spectral_abscissa: lambda_max - shift_c })
}

/// Hurwitz state matrix with versor input/output matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct StableSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    shift_c: f64,
    spectral_abscissa: f64,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl StableSystem {
    /// Builds `(A₀ − cI, B, C)` from a network under the given shift policy.
    pub fn from_spec(spec: &NetworkSpec, policy: ShiftPolicy) -> Result<Self> {
        let shifted = stabilize(&spec.adjacency(), policy)?;
        Self::assemble(
            shifted.a_matrix,
            shifted.shift_c,
            shifted.spectral_abscissa,
            spec.inputs().to_vec(),
            spec.outputs().to_vec(),
        )
    }

    /// Wraps an already-Hurwitz state matrix (reported shift 0).
    pub fn from_hurwitz(a: DMatrix<f64>, inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        linalg::ensure_square(&a, "state matrix")?;
        linalg::ensure_finite(&a)?;
        let abscissa = linalg::spectral_abscissa(&a)?;
        if abscissa >= 0.0 {
            return Err(Error::NotHurwitz { abscissa });
        }
        Self::assemble(a, 0.0, abscissa, inputs, outputs)
    }

    fn assemble(
        a: DMatrix<f64>,
        shift_c: f64,
        spectral_abscissa: f64,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
    ) -> Result<Self> {
        let n = a.nrows();
        validate_node_set(Side::Input, &inputs, n)?;
        validate_node_set(Side::Output, &outputs, n)?;
        Ok(StableSystem {
            b: linalg::versor_columns(n, &inputs),
            c: linalg::versor_columns(n, &outputs).transpose(),
            a,
            shift_c,
            spectral_abscissa,
            inputs,
            outputs,
        })
    }

    /// Same dynamics, different input nodes.
    pub fn with_inputs(&self, inputs: Vec<usize>) -> Result<Self> {
        Self::assemble(
            self.a.clone(),
            self.shift_c,
            self.spectral_abscissa,
            inputs,
            self.outputs.clone(),
        )
    }

    /// Same dynamics, different output nodes.
    pub fn with_outputs(&self, outputs: Vec<usize>) -> Result<Self> {
        Self::assemble(
            self.a.clone(),
            self.shift_c,
            self.spectral_abscissa,
            self.inputs.clone(),
            outputs,
        )
    }

    pub fn with_roles(&self, inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        Self::assemble(self.a.clone(), self.shift_c, self.spectral_abscissa, inputs, outputs)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn shift_c(&self) -> f64 {
        self.shift_c
    }
    pub fn spectral_abscissa(&self) -> f64 {
        self.spectral_abscissa
    }
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }
}

/// Normalized Henrici departure from normality,
/// `sqrt(‖A‖_F² − Σ|λ_i|²) / ‖A‖_F`.
///
/// The radicand is accumulated from non-negative terms rather than by
/// subtraction, so normal matrices give zero to roundoff in the index
/// itself rather than in its square.
pub fn henrici_index(a: &DMatrix<f64>) -> Result<f64> {
    linalg::ensure_square(a, "matrix")?;
    let fro2 = a.norm_squared();
    if fro2 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let radicand = linalg::departure_from_normality_sq(a)?;
    Ok((radicand.sqrt() / fro2.sqrt()).min(1.0))
}

/// Acyclicity verdict; the order is present exactly when the graph is a DAG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DagCheck {
    pub is_dag: bool,
    pub order: Option<Vec<usize>>,
}

pub fn detect_dag(spec: &NetworkSpec) -> DagCheck {
    let order = spec.digraph().topological_order();
    DagCheck { is_dag: order.is_some(), order }
}

/// Hop count of the shortest directed path, ignoring weights and self-loops.
pub fn shortest_unweighted_path(spec: &NetworkSpec, from: usize, to: usize) -> Option<usize> {
    spec.digraph().hop_distances(from)[to]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralReport {
    pub is_dag: bool,
    /// Computed on the unshifted adjacency `A₀`.
    pub henrici_index: f64,
    /// `shortest_paths[o][i]`: hops from input `i` to output `o`; `None` if unreachable.
    pub shortest_paths: Vec<Vec<Option<usize>>>,
}

pub fn structural_report(spec: &NetworkSpec) -> Result<StructuralReport> {
    let g = spec.digraph();
    let from_inputs: Vec<Vec<Option<usize>>> =
        spec.inputs().iter().map(|&i| g.hop_distances(i)).collect();
    let shortest_paths = spec
        .outputs()
        .iter()
        .map(|&o| from_inputs.iter().map(|dist| dist[o]).collect())
        .collect();
    Ok(StructuralReport {
        is_dag: g.topological_order().is_some(),
        henrici_index: henrici_index(&spec.adjacency())?,
        shortest_paths,
    })
}

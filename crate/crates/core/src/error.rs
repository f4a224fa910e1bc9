use std::fmt;

/// Errors produced by network construction and the numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),

    #[error("edge {edge} references node {node}, but the network has {nodes} nodes")]
    EndpointOutOfRange { edge: usize, node: usize, nodes: usize },

    #[error("edge {edge} has invalid weight {weight} (weights must be finite and non-negative)")]
    InvalidWeight { edge: usize, weight: f64 },

    #[error("{0} node set is empty")]
    EmptyNodeSet(Side),

    #[error("{side} node set contains node {node} more than once")]
    DuplicateNode { side: Side, node: usize },

    #[error("{side} node set references node {node}, but the network has {nodes} nodes")]
    NodeOutOfRange { side: Side, node: usize, nodes: usize },

    #[error("unknown node label `{0}`")]
    UnknownLabel(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("Henrici index is undefined for the zero matrix")]
    ZeroMatrix,

    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:.6e} >= 0)")]
    NotHurwitz { abscissa: f64 },

    #[error("Lyapunov operator is numerically singular: {0}")]
    IllConditioned(String),

    #[error("Lyapunov residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("real Schur decomposition did not converge")]
    SchurFailed,

    #[error(
        "Gramian is not numerically invertible (condition {condition:.3e}); {} near-null direction(s), dominant nodes {:?}",
        directions.len(),
        dominant_nodes(directions)
    )]
    Uncontrollable {
        condition: f64,
        directions: Vec<Vec<f64>>,
    },

    #[error("resolvent (sI - A) is near-singular at s = {s} (condition estimate {condition:.3e})")]
    SingularResolvent { s: String, condition: f64 },

    #[error("graph contains a directed cycle (self-loops excluded)")]
    NotADag,

    #[error("path count {count} exceeds the limit of {limit}; use the dense inverse instead")]
    PathExplosion { count: f64, limit: usize },

    #[error("node {0} has a non-negative diagonal entry; every node needs a strictly negative leak")]
    ZeroLeak(usize),

    #[error("off-diagonal entry A[{row}][{col}] = {value} is negative; path gains require non-negative edges")]
    NegativeEdgeGain { row: usize, col: usize, value: f64 },

    #[error("matrix dimension {dim} exceeds the limit {limit} for the determinant route")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("node {output} is not reachable from node {input}")]
    Unreachable { input: usize, output: usize },

    #[error("sample distribution is degenerate (zero spread) but the observed value {observed} differs from the mean {mean}")]
    DegenerateDistribution { observed: f64, mean: f64 },

    #[error("trajectory horizon too short: {0}")]
    InsufficientHorizon(String),

    #[error("step h = {step} is too large for exact discretization (|A|*h = {scaled:.3e})")]
    StepTooLarge { step: f64, scaled: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DuplicateLabel(_)
                | Error::EndpointOutOfRange { .. }
                | Error::InvalidWeight { .. }
                | Error::EmptyNodeSet(_)
                | Error::DuplicateNode { .. }
                | Error::NodeOutOfRange { .. }
                | Error::UnknownLabel(_)
                | Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::NonFinite
                | Error::NotADag
                | Error::NegativeEdgeGain { .. }
                | Error::ZeroLeak(_)
                | Error::DimensionTooLarge { .. }
                | Error::Unreachable { .. }
                | Error::InsufficientHorizon(_)
                | Error::StepTooLarge { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

fn dominant_nodes(directions: &[Vec<f64>]) -> Vec<usize> {
    directions
        .iter()
        .filter_map(|v| {
            v.iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, _)| i)
        })
        .collect()
}

/// Which side of the input/output pairing a node set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Input,
    Output,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Input => f.write_str("input"),
            Side::Output => f.write_str("output"),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

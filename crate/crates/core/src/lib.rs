//! Signal amplification analysis of directed weighted networks viewed as
//! open linear time-invariant systems `ẋ = Ax + Bu`, `y = Cx`.
//!
//! A [`NetworkSpec`] holds the raw weighted digraph and its input/output
//! node sets. [`StableSystem`] applies a spectral shift `A = A₀ − cI` so that
//! `A` is Hurwitz, and the analysis modules work on that system:
//!
//! - [`gramian`]: Lyapunov solves, Gramians, H₂-norms, steering energy.
//! - [`frequency`]: transfer functions, Bode sweeps, DC gains.
//! - [`dag`]: DC gains of acyclic networks as sums over directed paths.
//! - [`selection`]: per-node contributions and optimal node sets.
//! - [`stats`]: Monte-Carlo scoring of an empirical input set.
//! - [`simulation`]: exact time-domain integration.
//! - [`io`]: edge-list and role-file parsing.

pub mod dag;
pub mod error;
pub mod fixtures;
pub mod frequency;
pub mod gramian;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod network;
pub mod selection;
pub mod simulation;
pub mod stats;

pub use dag::{dag_dc_entry, dominant_paths, enumerate_paths, DagEntry, PathGainTerm};
pub use error::{Error, Result, Side};
pub use frequency::{
    asymptotic_prediction, bode_sweep, cofactor_dc_gain, dc_gain, default_bode_sweep,
    transfer_function, AsymptoticPrediction, BodeSweep, DcGain, NodePair,
};
pub use gramian::{
    controllability_gramian, gramian_spectrum, h2_norm, min_steering_energy, observability_gramian,
    solve_lyapunov, trace_linear_approximation, Gramian, GramianKind, H2Report, LyapunovSolver,
    TraceApproximation,
};
pub use network::{
    build_adjacency, detect_dag, henrici_index, shortest_unweighted_path, stabilize,
    structural_report, DagCheck, Edge, NetworkSpec, ShiftPolicy, Shifted, StableSystem,
    StructuralReport,
};
pub use selection::{
    input_contributions, output_contributions, top_k, ContributionCache, ContributionVector,
    Direction,
};
pub use simulation::{simulate, steady_state_extract, InputKind, SteadyState, Trajectory};
pub use stats::{
    empirical_test, sample_trace_distribution, score_empirical_choice, trace_vs_henrici,
    Classification, SampleStats, Thresholds,
};

//! Continuous-time Lyapunov solver, Gramians and H₂-norms.
//!
//! `A W + W Aᵀ + Q = 0` is solved by the Bartels–Stewart method: `A` is
//! reduced once to real Schur form `A = U T Uᵀ`, the transformed equation
//! `T Y + Y Tᵀ = −Uᵀ Q U` is solved block by block from the bottom-right
//! corner, and `W = U Y Uᵀ`. The Schur factorization is cached in
//! [`LyapunovSolver`] so that many right-hand sides share one reduction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::network::StableSystem;

/// Relative Lyapunov residual accepted from a solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Negative eigenvalues down to `−PSD_TOLERANCE·λ_max` count as zero.
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Condition number above which a Gramian is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GramianKind {
    Controllability,
    Observability,
}

/// Symmetric PSD solution of a Lyapunov equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Gramian {
    pub matrix: DMatrix<f64>,
    /// `‖A W + W Aᵀ + Q‖_F` of the returned (symmetrized) matrix.
    pub residual_norm: f64,
    pub kind: GramianKind,
}

impl Gramian {
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// Real Schur factorization of a Hurwitz matrix, reusable across solves.
#[derive(Debug, Clone)]
pub struct LyapunovSolver {
    a: DMatrix<f64>,
    a_norm: f64,
    u: DMatrix<f64>,
    t: DMatrix<f64>,
    blocks: Vec<(usize, usize)>,
}

impl LyapunovSolver {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        linalg::ensure_square(a, "state matrix")?;
        linalg::ensure_finite(a)?;
        let (u, t) = linalg::real_schur(a)?;
        let eig = linalg::schur_eigenvalues(&t);
        let abscissa = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if abscissa >= 0.0 {
            return Err(Error::NotHurwitz { abscissa });
        }
        let a_norm = a.norm();
        // The operator X ↦ TX + XTᵀ has eigenvalues λ_i + λ_j, all with real
        // part ≤ 2·abscissa.
        if 2.0 * abscissa.abs() <= 1e3 * f64::EPSILON * a_norm {
            return Err(Error::IllConditioned(format!(
                "spectral abscissa {abscissa:.3e} is negligible against ‖A‖_F = {a_norm:.3e}"
            )));
        }
        let blocks = linalg::schur_blocks(&t);
        Ok(LyapunovSolver { a: a.clone(), a_norm, u, t, blocks })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Solves `A W + W Aᵀ + Q = 0` for symmetric `Q`.
    pub fn solve(&self, q: &DMatrix<f64>, kind: GramianKind) -> Result<Gramian> {
        let n = self.dim();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "right-hand side must be {n}x{n}, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        linalg::ensure_finite(q)?;
        let q_norm = q.norm();
        if (q - q.transpose()).norm() > 1e-12 * q_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument("right-hand side must be symmetric".into()));
        }

        let f = self.u.transpose() * q * &self.u;
        let y = self.solve_triangular(&f)?;
        let mut w = &self.u * y * self.u.transpose();
        linalg::symmetrize(&mut w);

        let residual_norm = (&self.a * &w + &w * self.a.transpose() + q).norm();
        let tolerance = RESIDUAL_TOLERANCE * (self.a_norm * w.norm() + q_norm);
        if residual_norm > tolerance {
            return Err(Error::ResidualTooLarge { residual: residual_norm, tolerance });
        }
        Ok(Gramian { matrix: w, residual_norm, kind })
    }

    /// Solves `T Y + Y Tᵀ = −F` for symmetric `F`, filling the lower block
    /// triangle and mirroring it.
    fn solve_triangular(&self, f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let t = &self.t;
        let mut y = DMatrix::<f64>::zeros(n, n);

        for (bi, &(i0, p)) in self.blocks.iter().enumerate().rev() {
            let i_end = i0 + p;
            for &(j0, q) in self.blocks[..=bi].iter().rev() {
                let j_end = j0 + q;
                let mut rhs = -f.view((i0, j0), (p, q)).into_owned();
                if i_end < n {
                    rhs -= t.view((i0, i_end), (p, n - i_end)) * y.view((i_end, j0), (n - i_end, q));
                }
                if j_end < n {
                    rhs -= y.view((i0, j_end), (p, n - j_end))
                        * t.view((j0, j_end), (q, n - j_end)).transpose();
                }
                let x = solve_small_sylvester(
                    &t.view((i0, i0), (p, p)).into_owned(),
                    &t.view((j0, j0), (q, q)).into_owned(),
                    &rhs,
                    self.a_norm,
                )?;
                y.view_mut((i0, j0), (p, q)).copy_from(&x);
                if i0 != j0 {
                    y.view_mut((j0, i0), (q, p)).copy_from(&x.transpose());
                }
            }
        }
        Ok(y)
    }
}

/// `T_ii X + X T_jjᵀ = R` for blocks of size ≤ 2 via the Kronecker system
/// `(I ⊗ T_ii + T_jj ⊗ I) vec(X) = vec(R)`.
fn solve_small_sylvester(
    tii: &DMatrix<f64>,
    tjj: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
    scale: f64,
) -> Result<DMatrix<f64>> {
    let (p, q) = (tii.nrows(), tjj.nrows());
    if p == 1 && q == 1 {
        let d = tii[(0, 0)] + tjj[(0, 0)];
        if d.abs() <= 1e3 * f64::EPSILON * scale {
            return Err(Error::IllConditioned(format!("λ_i + λ_j = {d:.3e}")));
        }
        return Ok(DMatrix::from_element(1, 1, rhs[(0, 0)] / d));
    }
    let m = p * q;
    let mut k = DMatrix::<f64>::zeros(m, m);
    for c in 0..q {
        for r in 0..p {
            let row = c * p + r;
            for r2 in 0..p {
                k[(row, c * p + r2)] += tii[(r, r2)];
            }
            for c2 in 0..q {
                k[(row, c2 * p + r)] += tjj[(c, c2)];
            }
        }
    }
    let lu = k.clone().lu();
    let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |acc, x| acc.min(x.abs()));
    if min_pivot <= 1e3 * f64::EPSILON * scale {
        return Err(Error::IllConditioned(format!(
            "coupled {p}x{q} Schur block is singular (pivot {min_pivot:.3e})"
        )));
    }
    let v = DVector::from_column_slice(rhs.as_slice());
    let x = lu.solve(&v).ok_or_else(|| Error::IllConditioned("block solve failed".into()))?;
    Ok(DMatrix::from_column_slice(p, q, x.as_slice()))
}

/// Solves `A W + W Aᵀ + Q = 0` for Hurwitz `A` and symmetric PSD `Q`.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<Gramian> {
    LyapunovSolver::new(a)?.solve(q, GramianKind::Controllability)
}

/// `A W_c + W_c Aᵀ + B Bᵀ = 0`.
pub fn controllability_gramian(sys: &StableSystem) -> Result<Gramian> {
    let b = sys.b();
    LyapunovSolver::new(sys.a())?.solve(&(b * b.transpose()), GramianKind::Controllability)
}

/// `Aᵀ W_o + W_o A + Cᵀ C = 0`.
pub fn observability_gramian(sys: &StableSystem) -> Result<Gramian> {
    let c = sys.c();
    LyapunovSolver::new(&sys.a().transpose())?.solve(&(c.transpose() * c), GramianKind::Observability)
}

/// Gramian of a single versor column `e_node`, reusing a factorization.
pub(crate) fn single_node_gramian(
    solver: &LyapunovSolver,
    node: usize,
    kind: GramianKind,
) -> Result<Gramian> {
    let n = solver.dim();
    let mut q = DMatrix::zeros(n, n);
    q[(node, node)] = 1.0;
    solver.solve(&q, kind)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Report {
    pub h2_squared: f64,
    pub h2: f64,
    /// `per_pair[o][i]`: contribution of input `i` measured at output `o`.
    pub per_pair: Vec<Vec<f64>>,
}

/// Squared H₂-norm `Tr(C W_c Cᵀ)` with its input/output pair decomposition.
///
/// Pair contributions come from single-node Gramian diagonals. Whichever
/// side has fewer nodes is solved for: single-input controllability solves
/// (`W_c^{(i)}[o][o]`) or single-output observability solves
/// (`W_o^{(o)}[i][i]`).
pub fn h2_norm(sys: &StableSystem) -> Result<H2Report> {
    let solver = LyapunovSolver::new(sys.a())?;
    let b = sys.b();
    let wc = solver.solve(&(b * b.transpose()), GramianKind::Controllability)?;
    let h2_squared: f64 = sys.outputs().iter().map(|&o| wc.matrix[(o, o)]).sum();

    let (inputs, outputs) = (sys.inputs(), sys.outputs());
    let mut per_pair = vec![vec![0.0; inputs.len()]; outputs.len()];
    if inputs.len() <= outputs.len() {
        let cols: Vec<Vec<f64>> = inputs
            .par_iter()
            .map(|&i| {
                let g = single_node_gramian(&solver, i, GramianKind::Controllability)?;
                Ok(outputs.iter().map(|&o| g.matrix[(o, o)]).collect())
            })
            .collect::<Result<_>>()?;
        for (ci, col) in cols.iter().enumerate() {
            for (ro, v) in col.iter().enumerate() {
                per_pair[ro][ci] = *v;
            }
        }
    } else {
        let dual = LyapunovSolver::new(&sys.a().transpose())?;
        per_pair = outputs
            .par_iter()
            .map(|&o| {
                let g = single_node_gramian(&dual, o, GramianKind::Observability)?;
                Ok(inputs.iter().map(|&i| g.matrix[(i, i)]).collect())
            })
            .collect::<Result<_>>()?;
    }
    Ok(H2Report { h2_squared, h2: h2_squared.max(0.0).sqrt(), per_pair })
}

/// Minimum input energy `x_fᵀ W_c⁻¹ x_f` to reach `x_f` from the origin.
pub fn min_steering_energy(gramian: &Gramian, x_f: &DVector<f64>) -> Result<f64> {
    if gramian.kind != GramianKind::Controllability {
        return Err(Error::InvalidArgument(
            "steering energy needs a controllability Gramian".into(),
        ));
    }
    let n = gramian.matrix.nrows();
    if x_f.len() != n {
        return Err(Error::InvalidArgument(format!(
            "target state has length {}, expected {n}",
            x_f.len()
        )));
    }
    let eig = SymmetricEigen::new(gramian.matrix.clone());
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if !(condition < CONDITION_LIMIT) {
        let directions = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l * CONDITION_LIMIT <= lmax)
            .map(|(k, _)| eig.eigenvectors.column(k).iter().copied().collect())
            .collect();
        return Err(Error::Uncontrollable { condition, directions });
    }
    let chol = gramian
        .matrix
        .clone()
        .cholesky()
        .ok_or(Error::Uncontrollable { condition, directions: Vec::new() })?;
    Ok(x_f.dot(&chol.solve(x_f)))
}

/// Eigenvalues of a Gramian in descending order.
pub fn gramian_spectrum(gramian: &Gramian) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = SymmetricEigen::new(gramian.matrix.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if let (Some(&max), Some(&min)) = (ev.first(), ev.last()) {
        if min < -PSD_TOLERANCE * max.abs() {
            return Err(Error::IllConditioned(format!(
                "Gramian is indefinite (eigenvalues {min:.3e} .. {max:.3e})"
            )));
        }
    }
    Ok(ev)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceApproximation {
    /// `m / (2|a|)`.
    pub predicted: f64,
    /// `Tr(W_c)` from the Lyapunov solve.
    pub trace: f64,
    /// `|Tr(W_c) − m/(2|a|)| / Tr(W_c)`.
    pub relative_deviation: f64,
}

/// Compares `Tr(W_c)` with the large-|a| estimate `m/(2|a|)`.
pub fn trace_linear_approximation(sys: &StableSystem) -> Result<TraceApproximation> {
    let trace = controllability_gramian(sys)?.trace();
    let m = sys.inputs().len() as f64;
    let predicted = m / (2.0 * sys.spectral_abscissa().abs());
    Ok(TraceApproximation {
        predicted,
        trace,
        relative_deviation: (trace - predicted).abs() / trace,
    })
}

//! Dense kernels shared by the analysis modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn ensure_finite(a: &DMatrix<f64>) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn ensure_square(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

/// Real Schur form `A = Q T Qᵀ` with `T` upper quasi-triangular.
///
/// Entries below the first subdiagonal are zeroed; a nonzero `T[k+1][k]`
/// marks a 2x2 diagonal block.
pub(crate) fn real_schur(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 1000 * n.max(4))
        .ok_or(Error::SchurFailed)?;
    let (q, mut t) = schur.unpack();
    for j in 0..n {
        for i in (j + 2)..n {
            t[(i, j)] = 0.0;
        }
    }
    // two adjacent nonzero subdiagonals means the iteration did not deflate
    for k in 0..n.saturating_sub(2) {
        if t[(k + 1, k)] != 0.0 && t[(k + 2, k + 1)] != 0.0 {
            return Err(Error::SchurFailed);
        }
    }
    Ok((q, t))
}

/// Diagonal block partition `(start, size)` of a quasi-triangular matrix.
pub(crate) fn schur_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)] != 0.0 {
            blocks.push((k, 2));
            k += 2;
        } else {
            blocks.push((k, 1));
            k += 1;
        }
    }
    blocks
}

/// Eigenvalues of a quasi-triangular Schur factor.
pub(crate) fn schur_eigenvalues(t: &DMatrix<f64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(t.nrows());
    for (k, size) in schur_blocks(t) {
        if size == 1 {
            out.push(Complex64::new(t[(k, k)], 0.0));
        } else {
            let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
            let half_tr = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                out.push(Complex64::new(half_tr + r, 0.0));
                out.push(Complex64::new(half_tr - r, 0.0));
            } else {
                let r = (-disc).sqrt();
                out.push(Complex64::new(half_tr, r));
                out.push(Complex64::new(half_tr, -r));
            }
        }
    }
    out
}

/// Eigenvalues of a general real square matrix.
///
/// The matrix is first split into the strongly connected components of its
/// off-diagonal sparsity pattern. Under a topological ordering of the
/// components it is block triangular, so singleton components contribute
/// their diagonal entry exactly and only the nontrivial blocks go through
/// the QR iteration. This keeps the spectra of DAG-like networks exact
/// instead of smearing defective eigenvalues by O(eps^(1/k)).
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    ensure_square(a, "matrix")?;
    ensure_finite(a)?;
    let n = a.nrows();
    let mut out = Vec::with_capacity(n);
    for comp in strongly_connected_components(a) {
        if comp.len() == 1 {
            let i = comp[0];
            out.push(Complex64::new(a[(i, i)], 0.0));
        } else {
            let sub = a.select_rows(&comp).select_columns(&comp);
            let (_, t) = real_schur(&sub)?;
            out.extend(schur_eigenvalues(&t));
        }
    }
    Ok(out)
}

/// `‖A‖_F² − Σ|λ_i|²` summed from non-negative pieces, so it does not cancel
/// on normal matrices: entries coupling different strongly connected
/// components, plus the strictly upper Schur energy of each component
/// (2x2 diagonal blocks contribute `(a−d)² + (b+c)²` or `(b−c)²`).
pub(crate) fn departure_from_normality_sq(a: &DMatrix<f64>) -> Result<f64> {
    ensure_square(a, "matrix")?;
    ensure_finite(a)?;
    let n = a.nrows();
    let comps = strongly_connected_components(a);
    let mut comp_of = vec![0usize; n];
    for (k, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = k;
        }
    }
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..n {
            if comp_of[i] != comp_of[j] {
                total += a[(i, j)] * a[(i, j)];
            }
        }
    }
    for comp in comps.iter().filter(|c| c.len() > 1) {
        let (_, t) = real_schur(&a.select_rows(comp).select_columns(comp))?;
        let blocks = schur_blocks(&t);
        for &(k, size) in &blocks {
            for j in (k + size)..t.ncols() {
                for i in k..k + size {
                    total += t[(i, j)] * t[(i, j)];
                }
            }
            if size == 2 {
                let (p, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
                let disc = 0.25 * (p - d) * (p - d) + b * c;
                total += if disc < 0.0 { (p - d) * (p - d) + (b + c) * (b + c) } else { (b - c) * (b - c) };
            }
        }
    }
    Ok(total)
}

/// Tarjan's algorithm over the off-diagonal nonzero pattern (edge j -> i
/// whenever `a[i][j] != 0`). Components come out with sorted members.
pub(crate) fn strongly_connected_components(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| i != j && a[(i, j)] != 0.0).collect())
        .collect();

    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (node, position in its successor list)
        let mut work = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// `max_i Re(λ_i(a))`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub(crate) fn versor_columns(n: usize, nodes: &[usize]) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, nodes.len());
    for (col, &node) in nodes.iter().enumerate() {
        b[(node, col)] = 1.0;
    }
    b
}

pub(crate) fn symmetrize(w: &mut DMatrix<f64>) {
    let n = w.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = m;
            w[(j, i)] = m;
        }
    }
}

pub(crate) fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

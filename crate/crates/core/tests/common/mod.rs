//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use opennet::{stabilize, ShiftPolicy, StableSystem};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lyapunov solution from the N²×N² Kronecker system
/// `(I ⊗ A + A ⊗ I) vec W = −vec Q`.
pub fn vectorized_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert!(n <= 12, "vectorized oracle is O(N⁶)");
    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = -nalgebra::DVector::from_column_slice(q.as_slice());
    let v = k.lu().solve(&rhs).expect("Kronecker system is nonsingular");
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// `∫₀^∞ e^{At} Q e^{Aᵀt} dt` by Simpson on a short base interval followed by
/// interval doubling, `I(2T) = I(T) + Φ(T) I(T) Φ(T)ᵀ`, until the added piece
/// falls below `1e−13` of the total.
pub fn quadrature_gramian(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = a.norm().max(1e-3);
    let tau = 0.1 / scale;
    let sub = 64;
    let h = tau / sub as f64;
    let step = (a * h).exp();
    let mut x = q.clone();
    let mut acc = q.clone();
    for k in 1..=sub {
        x = &step * &x * step.transpose();
        let w = if k == sub { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += &x * w;
    }
    let mut integral = acc * (h / 3.0);
    let mut phi = (a * tau).exp();
    for _ in 0..200 {
        let add = &phi * &integral * phi.transpose();
        let done = add.norm() <= 1e-13 * integral.norm();
        integral += add;
        if done {
            break;
        }
        phi = &phi * &phi;
    }
    integral
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense random state matrix with entries in [−1, 1], shifted to spectral
/// abscissa `−margin`.
pub fn random_hurwitz(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> DMatrix<f64> {
    let a0 = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    stabilize(&a0, ShiftPolicy::Margin(margin)).expect("finite matrix").a_matrix
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = index::sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

/// Random stable system with `N ∈ [2, max_n]` and random nonempty input and
/// output sets.
pub fn random_system(rng: &mut ChaCha8Rng, max_n: usize) -> StableSystem {
    let n = rng.random_range(2..=max_n);
    let margin = rng.random_range(0.5..2.0);
    let a = random_hurwitz(rng, n, margin);
    let m = rng.random_range(1..=n);
    let p = rng.random_range(1..=n);
    let inputs = random_subset(rng, n, m);
    let outputs = random_subset(rng, n, p);
    StableSystem::from_hurwitz(a, inputs, outputs).expect("shifted matrix is Hurwitz")
}

/// Random non-negative weighted network as a shifted system.
pub fn random_network_system(rng: &mut ChaCha8Rng, n: usize, density: f64) -> StableSystem {
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.random_bool(density) {
                edges.push(opennet::Edge::new(s, t, rng.random_range(0.1..2.0)));
            }
        }
    }
    let spec = opennet::NetworkSpec::unlabelled(n, edges).unwrap();
    StableSystem::from_spec(&spec, ShiftPolicy::Margin(rng.random_range(0.5..2.0))).unwrap()
}

pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

/// Chain H₂² from the central binomial coefficient formula.
pub fn chain_h2_closed_form(n: usize, d: f64, c: f64) -> f64 {
    let k = n as u64 - 1;
    let mut binom = 1.0f64;
    for i in 0..k {
        binom = binom * (2 * k - i) as f64 / (i + 1) as f64;
    }
    d * d / (2.0 * c.powi(2 * n as i32 - 1)) * binom / 4f64.powi(k as i32)
}

/// Every `k`-subset of `0..n` in lexicographic order.
pub fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

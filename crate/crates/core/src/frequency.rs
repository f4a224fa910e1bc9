//! Frequency response: `G(s) = C (sI − A)⁻¹ B`, Bode sweeps, DC gains and
//! the high-frequency slope/phase law.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, Side};
use crate::graph::Digraph;
use crate::network::StableSystem;

/// Pivot-ratio bound beyond which a resolvent is treated as singular.
pub const RESOLVENT_CONDITION_LIMIT: f64 = 1e12;
/// Half-power drop, `10·log₁₀ 2` dB.
pub const HALF_POWER_DB: f64 = 3.010_299_956_639_812;
/// Relative tolerance of the slope and final-phase law.
pub const ASYMPTOTIC_TOLERANCE: f64 = 0.05;
/// Largest dimension accepted by [`cofactor_dc_gain`].
pub const COFACTOR_DIM_LIMIT: usize = 64;
pub const DEFAULT_SWEEP_POINTS: usize = 400;

/// Input node and output node of a SISO channel, as state indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodePair {
    pub input: usize,
    pub output: usize,
}

impl NodePair {
    pub fn new(input: usize, output: usize) -> Self {
        NodePair { input, output }
    }

    fn check(&self, n: usize) -> Result<()> {
        for (side, node) in [(Side::Input, self.input), (Side::Output, self.output)] {
            if node >= n {
                return Err(Error::NodeOutOfRange { side, node, nodes: n });
            }
        }
        Ok(())
    }
}

fn resolvent_lu(a: &DMatrix<f64>, s: Complex64) -> Result<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    let n = a.nrows();
    let mut m = a.map(|x| Complex64::new(-x, 0.0));
    for k in 0..n {
        m[(k, k)] += s;
    }
    let lu = m.lu();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for d in lu.u().diagonal().iter() {
        lo = lo.min(d.norm());
        hi = hi.max(d.norm());
    }
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition < RESOLVENT_CONDITION_LIMIT) {
        return Err(Error::SingularResolvent { s: format!("{s}"), condition });
    }
    Ok(lu)
}

fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Full `p × m` transfer matrix at `s`.
pub fn transfer_function(sys: &StableSystem, s: Complex64) -> Result<DMatrix<Complex64>> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let lu = resolvent_lu(sys.a(), s)?;
    let x = lu
        .solve(&complexify(sys.b()))
        .ok_or_else(|| Error::SingularResolvent { s: format!("{s}"), condition: f64::INFINITY })?;
    Ok(complexify(sys.c()) * x)
}

/// Single entry `e_outᵀ (sI − A)⁻¹ e_in`.
pub fn transfer_entry(sys: &StableSystem, pair: NodePair, s: Complex64) -> Result<Complex64> {
    pair.check(sys.dim())?;
    let lu = resolvent_lu(sys.a(), s)?;
    let mut e = DVector::from_element(sys.dim(), Complex64::new(0.0, 0.0));
    e[pair.input] = Complex64::new(1.0, 0.0);
    let x = lu
        .solve(&e)
        .ok_or_else(|| Error::SingularResolvent { s: format!("{s}"), condition: f64::INFINITY })?;
    Ok(x[pair.output])
}

fn magnitude_db(g: Complex64) -> f64 {
    20.0 * g.norm().max(f64::MIN_POSITIVE).log10()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodeSweep {
    pub pair: NodePair,
    pub omegas: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    pub phase_deg: Vec<f64>,
    /// First frequency at which the magnitude is 3 dB below its DC value;
    /// `None` when the sweep never crosses that level.
    pub cornering_omega: Option<f64>,
    pub dc_gain_db: f64,
    pub warning: Option<String>,
}

/// Log-spaced grid of `points` frequencies from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let last = (points - 1) as f64;
    (0..points)
        .map(|k| match k {
            0 => lo,
            k if k + 1 == points => hi,
            k => 10f64.powf(a + (b - a) * k as f64 / last),
        })
        .collect()
}

/// Phase unwrapping from the first sample's principal value.
pub fn unwrap_degrees(principal: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(principal.len());
    let mut offset = 0.0;
    for (k, &p) in principal.iter().enumerate() {
        if k > 0 {
            let prev = out[k - 1];
            let mut v = p + offset;
            while v - prev > 180.0 {
                v -= 360.0;
                offset -= 360.0;
            }
            while v - prev < -180.0 {
                v += 360.0;
                offset += 360.0;
            }
            out.push(v);
        } else {
            out.push(p);
        }
    }
    out
}

/// Bode sweep over `points` log-spaced frequencies in `[omega_min, omega_max]`.
pub fn bode_sweep(
    sys: &StableSystem,
    pair: NodePair,
    omega_min: f64,
    omega_max: f64,
    points: usize,
) -> Result<BodeSweep> {
    pair.check(sys.dim())?;
    if !(omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 points, got {points}")));
    }
    let omegas = log_grid(omega_min, omega_max, points);
    let values: Vec<Complex64> = omegas
        .par_iter()
        .map(|&w| transfer_entry(sys, pair, Complex64::new(0.0, w)))
        .collect::<Result<_>>()?;
    let magnitude: Vec<f64> = values.iter().map(|&g| magnitude_db(g)).collect();
    let phase = unwrap_degrees(&values.iter().map(|g| g.arg().to_degrees()).collect::<Vec<_>>());

    let dc = transfer_entry(sys, pair, Complex64::new(0.0, 0.0))?;
    let reachable = Digraph::from_matrix(sys.a()).reaches(pair.input, pair.output);
    let warning = (!reachable).then(|| {
        format!(
            "no directed path from node {} to node {}; the response is zero up to roundoff",
            pair.input, pair.output
        )
    });
    let cornering_omega = if dc.norm() > 0.0 && reachable {
        find_corner(sys, pair, magnitude_db(dc) - HALF_POWER_DB, &omegas, &magnitude)?
    } else {
        None
    };

    Ok(BodeSweep {
        pair,
        omegas,
        magnitude_db: magnitude,
        phase_deg: phase,
        cornering_omega,
        dc_gain_db: magnitude_db(dc),
        warning,
    })
}

/// Sweep over the default range `[10⁻³|a|, 10⁴|a|]` with 400 points.
pub fn default_bode_sweep(sys: &StableSystem, pair: NodePair) -> Result<BodeSweep> {
    let a = sys.spectral_abscissa().abs();
    bode_sweep(sys, pair, 1e-3 * a, 1e4 * a, DEFAULT_SWEEP_POINTS)
}

fn find_corner(
    sys: &StableSystem,
    pair: NodePair,
    level: f64,
    omegas: &[f64],
    mag: &[f64],
) -> Result<Option<f64>> {
    let Some(k) = mag.iter().position(|&m| m < level) else {
        return Ok(None);
    };
    let f = |w: f64| -> Result<f64> {
        Ok(magnitude_db(transfer_entry(sys, pair, Complex64::new(0.0, w))?) - level)
    };
    if k == 0 {
        // crossing lies below the grid; DC is above the level, so bisect on [0, ω₀]
        let (mut lo, mut hi) = (0.0, omegas[0]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        return Ok(Some(0.5 * (lo + hi)));
    }
    let (mut lo, mut hi) = (omegas[k - 1].ln(), omegas[k].ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid.exp())? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 {
            break;
        }
    }
    Ok(Some((0.5 * (lo + hi)).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DcGain {
    /// `[A⁻¹]_{out,in}`.
    pub inverse_entry: f64,
    /// `20·log₁₀|[A⁻¹]_{out,in}|`.
    pub gain_db: f64,
    /// Phase of `G(0) = −[A⁻¹]_{out,in}`, in `(−180°, 180°]`.
    pub phase_deg: f64,
}

/// DC gain of one channel via `A x = e_in`.
pub fn dc_gain(sys: &StableSystem, pair: NodePair) -> Result<DcGain> {
    pair.check(sys.dim())?;
    let value = inverse_entry(sys.a(), pair)?;
    let g0 = -value;
    let phase_deg = if g0 < 0.0 { 180.0 } else { 0.0 };
    Ok(DcGain { inverse_entry: value, gain_db: 20.0 * value.abs().log10(), phase_deg })
}

/// `[A⁻¹]_{out,in}` from a dense LU solve.
pub fn inverse_entry(a: &DMatrix<f64>, pair: NodePair) -> Result<f64> {
    let n = a.nrows();
    let lu = a.clone().lu();
    let x = lu
        .solve(&crate::linalg::unit(n, pair.input))
        .ok_or_else(|| Error::IllConditioned("state matrix is singular".into()))?;
    Ok(x[pair.output])
}

/// `[A⁻¹]_{out,in}` from the adjugate, `(−1)^{i+j} det(M_{in,out}) / det A`.
/// Intended as a cross-check for small systems.
pub fn cofactor_dc_gain(a: &DMatrix<f64>, pair: NodePair) -> Result<f64> {
    crate::linalg::ensure_square(a, "state matrix")?;
    let n = a.nrows();
    if n > COFACTOR_DIM_LIMIT {
        return Err(Error::DimensionTooLarge { dim: n, limit: COFACTOR_DIM_LIMIT });
    }
    pair.check(n)?;
    let det = a.clone().lu().determinant();
    if det == 0.0 {
        return Err(Error::IllConditioned("state matrix is singular".into()));
    }
    let minor_det = if n == 1 {
        1.0
    } else {
        a.clone().remove_row(pair.input).remove_column(pair.output).lu().determinant()
    };
    let sign = if (pair.input + pair.output).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * minor_det / det)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub pair: NodePair,
    /// Unweighted shortest-path hop count from input to output.
    pub d: usize,
    pub predicted_slope_db_per_decade: f64,
    pub predicted_final_phase_deg: f64,
    pub measured_slope: f64,
    pub measured_final_phase: f64,
    pub slope_ok: bool,
    pub phase_ok: bool,
}

impl AsymptoticPrediction {
    pub fn passed(&self) -> bool {
        self.slope_ok && self.phase_ok
    }
}

/// Least-squares slope of `y` against `log₁₀ x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Compares the sweep's high-frequency behaviour with slope `−20(d+1)` dB
/// per decade and final phase `−90(d+1)°`.
pub fn asymptotic_prediction(sys: &StableSystem, sweep: &BodeSweep) -> Result<AsymptoticPrediction> {
    let pair = sweep.pair;
    pair.check(sys.dim())?;
    let d = Digraph::from_matrix(sys.a()).hop_distances(pair.input)[pair.output]
        .ok_or(Error::Unreachable { input: pair.input, output: pair.output })?;
    let top = *sweep.omegas.last().ok_or_else(|| Error::InvalidArgument("empty sweep".into()))?;
    let need = 100.0 * sys.spectral_abscissa().abs();
    if top < need {
        return Err(Error::InvalidArgument(format!(
            "sweep ends at {top:.4e} rad/s but must reach {need:.4e} rad/s"
        )));
    }
    let start = sweep.omegas.iter().position(|&w| w >= top / 10.0).unwrap_or(0);
    let (xs, ys) = (&sweep.omegas[start..], &sweep.magnitude_db[start..]);
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("fewer than two samples in the last decade".into()));
    }
    let measured_slope = log_slope(xs, ys);
    let measured_final_phase = *sweep.phase_deg.last().unwrap_or(&f64::NAN);
    let order = (d + 1) as f64;
    let predicted_slope = -20.0 * order;
    let predicted_phase = -90.0 * order;
    Ok(AsymptoticPrediction {
        pair,
        d,
        predicted_slope_db_per_decade: predicted_slope,
        predicted_final_phase_deg: predicted_phase,
        measured_slope,
        measured_final_phase,
        slope_ok: (measured_slope - predicted_slope).abs() <= ASYMPTOTIC_TOLERANCE * predicted_slope.abs(),
        phase_ok: (measured_final_phase - predicted_phase).abs()
            <= ASYMPTOTIC_TOLERANCE * predicted_phase.abs(),
    })
}

/// `(1/π) ∫₀^∞ ‖G(jω)‖_F² dω`, which equals the squared H₂-norm.
///
/// Composite Simpson on a log grid, with a flat tail below the grid and a
/// fitted power-law tail above it.
pub fn h2_frequency_integral(sys: &StableSystem) -> Result<f64> {
    let scale = sys.spectral_abscissa().abs();
    let top_scale = scale.max(sys.a().norm());
    let lo = 1e-6 * scale;
    let hi = 1e5 * top_scale;
    let decades = (hi / lo).log10();
    let intervals = 2 * ((decades * 60.0).ceil() as usize);
    let grid = log_grid(lo, hi, intervals + 1);
    let f: Vec<f64> = grid
        .par_iter()
        .map(|&w| transfer_function(sys, Complex64::new(0.0, w)).map(|g| g.norm_squared()))
        .collect::<Result<_>>()?;

    // in u = ln ω the integrand becomes f(ω)·ω
    let h = (hi / lo).ln() / intervals as f64;
    let mut body = f[0] * grid[0] + f[intervals] * grid[intervals];
    for k in 1..intervals {
        body += if k % 2 == 1 { 4.0 } else { 2.0 } * f[k] * grid[k];
    }
    body *= h / 3.0;

    let low_tail = f[0] * lo;
    let decay = -(f[intervals] / f[intervals - 1]).ln() / (grid[intervals] / grid[intervals - 1]).ln();
    let high_tail = if decay > 1.0 && f[intervals] > 0.0 {
        f[intervals] * hi / (decay - 1.0)
    } else {
        0.0
    };
    Ok((body + low_tail + high_tail) / std::f64::consts::PI)
}

//! Exact-discretization time stepping of `ẋ = Ax + Bu`, `y = Cx`.
//!
//! Every step multiplies by a matrix exponential of a (possibly augmented)
//! system, so the only error left in a trajectory is roundoff and horizon
//! truncation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::StableSystem;

/// Upper bound on `‖M‖₁·h` for the per-step exponential.
pub const MAX_SCALED_STEP: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub enum InputKind {
    /// `x(0) = B e_column`, `u ≡ 0`.
    Impulse { column: usize },
    /// `u_column(t) = sin(ωt)`, zero initial state.
    Sinusoid { omega: f64, column: usize },
    /// Zero-order hold on samples `u_k` (length m each) over `[kh, (k+1)h)`.
    Custom { samples: Vec<DVector<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    pub input_kind: InputKind,
    /// Spectral abscissa of the simulated system, used for horizon checks.
    pub spectral_abscissa: f64,
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn propagator(m: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>> {
    let scaled = one_norm(m) * h;
    if scaled > MAX_SCALED_STEP {
        return Err(Error::StepTooLarge { step: h, scaled });
    }
    Ok((m * h).exp())
}

/// Simulates over `[0, horizon]` with uniform step `step`.
pub fn simulate(sys: &StableSystem, input: InputKind, horizon: f64, step: f64) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite() && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if horizon < 10.0 * step {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must be at least ten steps ({})",
            10.0 * step
        )));
    }
    let n = sys.dim();
    let m = sys.inputs().len();
    let steps = (horizon / step).round() as usize;
    let a = sys.a();
    let check_column = |column: usize| {
        if column >= m {
            Err(Error::InvalidArgument(format!("input column {column} out of range for {m} inputs")))
        } else {
            Ok(())
        }
    };

    let states = match &input {
        InputKind::Impulse { column } => {
            check_column(*column)?;
            let phi = propagator(a, step)?;
            let mut x = sys.b().column(*column).into_owned();
            let mut out = Vec::with_capacity(steps + 1);
            out.push(x.clone());
            for _ in 0..steps {
                x = &phi * x;
                out.push(x.clone());
            }
            out
        }
        InputKind::Sinusoid { omega, column } => {
            check_column(*column)?;
            if !(*omega > 0.0 && omega.is_finite()) {
                return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
            }
            // z = [x; sin ωt; cos ωt]
            let mut aug = DMatrix::zeros(n + 2, n + 2);
            aug.view_mut((0, 0), (n, n)).copy_from(a);
            aug.view_mut((0, n), (n, 1)).copy_from(&sys.b().column(*column));
            aug[(n, n + 1)] = *omega;
            aug[(n + 1, n)] = -*omega;
            let phi = propagator(&aug, step)?;
            let mut z = DVector::zeros(n + 2);
            z[n + 1] = 1.0;
            let mut out = Vec::with_capacity(steps + 1);
            out.push(z.rows(0, n).into_owned());
            for _ in 0..steps {
                z = &phi * z;
                out.push(z.rows(0, n).into_owned());
            }
            out
        }
        InputKind::Custom { samples } => {
            if samples.len() < steps {
                return Err(Error::InvalidArgument(format!(
                    "{} input samples given, {steps} steps requested",
                    samples.len()
                )));
            }
            if let Some(bad) = samples.iter().find(|u| u.len() != m) {
                return Err(Error::InvalidArgument(format!(
                    "input sample has length {}, expected {m}",
                    bad.len()
                )));
            }
            let mut aug = DMatrix::zeros(n + m, n + m);
            aug.view_mut((0, 0), (n, n)).copy_from(a);
            aug.view_mut((0, n), (n, m)).copy_from(sys.b());
            let e = propagator(&aug, step)?;
            let phi = e.view((0, 0), (n, n)).into_owned();
            let gamma = e.view((0, n), (n, m)).into_owned();
            let mut x = DVector::zeros(n);
            let mut out = Vec::with_capacity(steps + 1);
            out.push(x.clone());
            for u in samples.iter().take(steps) {
                x = &phi * x + &gamma * u;
                out.push(x.clone());
            }
            out
        }
    };

    let outputs = states.iter().map(|x| sys.c() * x).collect();
    Ok(Trajectory {
        times: (0..=steps).map(|k| k as f64 * step).collect(),
        states,
        outputs,
        input_kind: input,
        spectral_abscissa: sys.spectral_abscissa(),
    })
}

/// Composite Simpson rule on uniform samples (trapezoid on a leftover
/// odd interval).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    if even > 0 {
        s = values[0] + values[even];
        for (k, v) in values.iter().enumerate().take(even).skip(1) {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * v;
        }
        s *= h / 3.0;
    }
    if even < intervals {
        s += 0.5 * h * (values[even] + values[intervals]);
    }
    s
}

/// `∫ ‖y(t)‖² dt` over a stored trajectory.
pub fn output_energy(traj: &Trajectory) -> f64 {
    let h = if traj.times.len() > 1 { traj.times[1] - traj.times[0] } else { 0.0 };
    let sq: Vec<f64> = traj.outputs.iter().map(|y| y.norm_squared()).collect();
    simpson(&sq, h)
}

/// Impulse-response energy summed over all input columns, which equals the
/// squared H₂-norm.
///
/// Each column is stepped until the remaining state is negligible
/// (`‖C‖²‖x‖²/(2|a|)` below `1e−13` of the accumulated energy, and at least
/// `10/|a|`). A `step` of `None` picks `0.05/max(|a|, ‖A‖_F)`.
pub fn impulse_energy(sys: &StableSystem, step: Option<f64>) -> Result<f64> {
    let a = sys.a();
    let rate = sys.spectral_abscissa().abs();
    let h = step.unwrap_or(0.05 / rate.max(a.norm()));
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let phi = propagator(a, h)?;
    let c = sys.c();
    let c_norm2 = c.norm_squared();
    let min_steps = (10.0 / rate / h).ceil() as usize;
    let max_steps = (2000.0 / rate / h).ceil() as usize;

    let mut total = 0.0;
    for col in 0..sys.inputs().len() {
        let mut x = sys.b().column(col).into_owned();
        let mut samples = vec![(c * &x).norm_squared()];
        let mut rough = 0.0;
        loop {
            x = &phi * x;
            let y2 = (c * &x).norm_squared();
            rough += 0.5 * h * (y2 + samples[samples.len() - 1]);
            samples.push(y2);
            let k = samples.len() - 1;
            if k >= min_steps && k % 2 == 0 {
                let tail = c_norm2 * x.norm_squared() / (2.0 * rate);
                if tail <= 1e-13 * rough.max(f64::MIN_POSITIVE) || k >= max_steps {
                    total += simpson(&samples, h);
                    break;
                }
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub amplitude: f64,
    /// In `(−180°, 180°]`.
    pub phase_deg: f64,
}

/// Fits `a·sin(ωt) + b·cos(ωt)` to output row `output` over the last four
/// periods; amplitude `√(a²+b²)`, phase `atan2(b, a)`.
pub fn steady_state_extract(traj: &Trajectory, omega: f64, output: usize) -> Result<SteadyState> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let end = *traj.times.last().ok_or_else(|| Error::InsufficientHorizon("empty trajectory".into()))?;
    let need = 5.0 / traj.spectral_abscissa.abs() + 4.0 * period;
    if end + 1e-9 * need < need {
        return Err(Error::InsufficientHorizon(format!(
            "horizon {end:.4} < 5/|a| + 4 periods = {need:.4}"
        )));
    }
    if traj.outputs.first().is_none_or(|y| output >= y.len()) {
        return Err(Error::InvalidArgument(format!("output row {output} out of range")));
    }
    let start = end - 4.0 * period;
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut used = 0usize;
    for (t, y) in traj.times.iter().zip(&traj.outputs) {
        if *t < start - 1e-12 * end {
            continue;
        }
        let (s, c) = (omega * t).sin_cos();
        let v = y[output];
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += v * s;
        yc += v * c;
        used += 1;
    }
    let det = ss * cc - sc * sc;
    if used < 3 || det.abs() <= 1e-12 * (ss * cc) {
        return Err(Error::InsufficientHorizon(
            "too few samples in the last four periods to fit a sinusoid".into(),
        ));
    }
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    let mut phase_deg = b.atan2(a).to_degrees();
    if phase_deg <= -180.0 {
        phase_deg += 360.0;
    }
    Ok(SteadyState { amplitude: a.hypot(b), phase_deg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gramian::h2_norm;
    use crate::network::ShiftPolicy;

    fn scalar() -> StableSystem {
        StableSystem::from_hurwitz(DMatrix::from_element(1, 1, -1.0), vec![0], vec![0]).unwrap()
    }

    #[test]
    fn first_order_impulse() {
        let traj = simulate(&scalar(), InputKind::Impulse { column: 0 }, 20.0, 0.01).unwrap();
        for (t, y) in traj.times.iter().zip(&traj.outputs).step_by(97) {
            assert!((y[0] - (-t).exp()).abs() < 1e-13);
        }
        assert!((output_energy(&traj) - 0.5).abs() < 1e-8);
        assert!((impulse_energy(&scalar(), None).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn first_order_sinusoid() {
        let traj = simulate(&scalar(), InputKind::Sinusoid { omega: 1.0, column: 0 }, 60.0, 0.01).unwrap();
        let ss = steady_state_extract(&traj, 1.0, 0).unwrap();
        assert!((ss.amplitude - 0.5f64.sqrt()).abs() < 1e-8);
        assert!((ss.phase_deg + 45.0).abs() < 1e-6);
    }

    #[test]
    fn pure_sinusoid_is_recovered() {
        let times: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.01).collect();
        let outputs = times.iter().map(|t| DVector::from_element(1, (2.0 * t).sin())).collect();
        let traj = Trajectory {
            states: Vec::new(),
            outputs,
            times,
            input_kind: InputKind::Sinusoid { omega: 2.0, column: 0 },
            spectral_abscissa: -1.0,
        };
        let ss = steady_state_extract(&traj, 2.0, 0).unwrap();
        assert!((ss.amplitude - 1.0).abs() < 1e-8);
        assert!(ss.phase_deg.abs() < 1e-8);
    }

    #[test]
    fn short_horizon_is_refused() {
        let traj = simulate(&scalar(), InputKind::Sinusoid { omega: 1.0, column: 0 }, 10.0, 0.01).unwrap();
        assert!(matches!(steady_state_extract(&traj, 1.0, 0), Err(Error::InsufficientHorizon(_))));
    }

    #[test]
    fn chain_impulse_energy_matches_h2() {
        let sys = StableSystem::from_spec(&fixtures::chain(3), ShiftPolicy::Margin(1.0)).unwrap();
        let e = impulse_energy(&sys, None).unwrap();
        let h2 = h2_norm(&sys).unwrap().h2_squared;
        assert!((e - h2).abs() <= 1e-4 * h2, "{e} vs {h2}");
    }

    #[test]
    fn argument_guards() {
        let sys = scalar();
        assert!(simulate(&sys, InputKind::Impulse { column: 0 }, 1.0, 0.5).is_err());
        assert!(simulate(&sys, InputKind::Impulse { column: 1 }, 10.0, 0.1).is_err());
        assert!(simulate(&sys, InputKind::Sinusoid { omega: 0.0, column: 0 }, 10.0, 0.1).is_err());
        assert!(matches!(
            simulate(&sys, InputKind::Impulse { column: 0 }, 1000.0, 60.0),
            Err(Error::StepTooLarge { .. })
        ));
        let samples = vec![DVector::from_element(1, 1.0); 5];
        assert!(simulate(&sys, InputKind::Custom { samples }, 10.0, 0.1).is_err());
    }

    #[test]
    fn constant_hold_reaches_dc_value() {
        let sys = scalar();
        let steps = 2000;
        let samples = vec![DVector::from_element(1, 2.0); steps];
        let traj = simulate(&sys, InputKind::Custom { samples }, 20.0, 0.01).unwrap();
        assert!((traj.outputs.last().unwrap()[0] - 2.0).abs() < 1e-8);
    }
}

use std::fmt::Write as _;

use opennet::frequency::{asymptotic_prediction, bode_sweep, dc_gain, NodePair};
use opennet::io::read_roles;
use opennet::simulation::output_energy;
use opennet::stats::empirical_test_with;
use opennet::{
    controllability_gramian, dag_dc_entry, gramian_spectrum, h2_norm, input_contributions, observability_gramian,
    output_contributions, simulate, steady_state_extract, structural_report, top_k, Direction, Error, InputKind,
    NetworkSpec, Result, Side, StableSystem, Thresholds,
};
use serde_json::{json, Map, Value};

use crate::args::{
    BodeArgs, Command, DcgainArgs, DirectionArg, GramianArg, GramianArgs, KindArg, RankArgs, SampleArgs, SideArg,
    SimulateArgs,
};

/// JSON result fields plus any CSV artifacts as `(file name, contents)`.
pub struct Output {
    pub fields: Map<String, Value>,
    pub csv: Vec<(String, String)>,
}

impl Output {
    fn json(value: Value) -> Self {
        match value {
            Value::Object(fields) => Output { fields, csv: Vec::new() },
            other => panic!("result must be a JSON object, got {other}"),
        }
    }

    fn with_csv(mut self, name: &str, body: String) -> Self {
        self.csv.push((name.to_string(), body));
        self
    }
}

pub struct Context<'a> {
    pub spec: &'a NetworkSpec,
    pub sys: &'a StableSystem,
    pub seed: u64,
}

impl Context<'_> {
    fn labels(&self, nodes: &[usize]) -> Vec<&str> {
        nodes.iter().map(|&v| self.spec.label(v)).collect()
    }

    fn node(&self, label: &str) -> Result<usize> {
        self.spec.index_of(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn pair(&self, labels: &[String]) -> Result<NodePair> {
        match labels {
            [i, o] => Ok(NodePair::new(self.node(i)?, self.node(o)?)),
            _ => Err(Error::InvalidArgument("--pair takes an input and an output label".into())),
        }
    }
}

pub fn run(ctx: &Context, command: &Command) -> Result<Output> {
    match command {
        Command::H2 => h2(ctx),
        Command::Gramian(args) => gramian(ctx, args),
        Command::Bode(args) => bode(ctx, args),
        Command::Dcgain(args) => dcgain(ctx, args),
        Command::Rank(args) => rank(ctx, args),
        Command::Sample(args) => sample(ctx, args),
        Command::Structure => structure(ctx),
        Command::Simulate(args) => simulate_cmd(ctx, args),
    }
}

fn system_fields(ctx: &Context) -> Value {
    json!({
        "nodes": ctx.sys.dim(),
        "inputs": ctx.labels(ctx.sys.inputs()),
        "outputs": ctx.labels(ctx.sys.outputs()),
        "shift_c": ctx.sys.shift_c(),
        "spectral_abscissa": ctx.sys.spectral_abscissa(),
    })
}

fn h2(ctx: &Context) -> Result<Output> {
    let report = h2_norm(ctx.sys)?;
    Ok(Output::json(json!({
        "system": system_fields(ctx),
        "h2_squared": report.h2_squared,
        "h2": report.h2,
        "per_pair": report.per_pair,
    })))
}

fn gramian(ctx: &Context, args: &GramianArgs) -> Result<Output> {
    let g = match args.kind {
        GramianArg::Controllability => controllability_gramian(ctx.sys)?,
        GramianArg::Observability => observability_gramian(ctx.sys)?,
    };
    let spectrum = gramian_spectrum(&g)?;
    let rows: Vec<Vec<f64>> = g.matrix.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(Output::json(json!({
        "system": system_fields(ctx),
        "kind": args.kind,
        "trace": g.trace(),
        "residual_norm": g.residual_norm,
        "spectrum": spectrum,
        "matrix": rows,
    })))
}

fn bode(ctx: &Context, args: &BodeArgs) -> Result<Output> {
    let pair = ctx.pair(&args.pair)?;
    let a = ctx.sys.spectral_abscissa().abs();
    let lo = args.omega_min.unwrap_or(1e-3 * a);
    let hi = args.omega_max.unwrap_or(1e4 * a);
    let sweep = bode_sweep(ctx.sys, pair, lo, hi, args.points)?;
    let (asymptotic, note) = match asymptotic_prediction(ctx.sys, &sweep) {
        Ok(p) => (
            json!({
                "d": p.d,
                "predicted_slope_db_per_decade": p.predicted_slope_db_per_decade,
                "predicted_final_phase_deg": p.predicted_final_phase_deg,
                "measured_slope_db_per_decade": p.measured_slope,
                "measured_final_phase_deg": p.measured_final_phase,
                "slope_ok": p.slope_ok,
                "phase_ok": p.phase_ok,
            }),
            None,
        ),
        Err(e) if e.is_validation() => (Value::Null, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let mut csv = String::from("omega,mag_db,phase_deg\n");
    for ((w, m), p) in sweep.omegas.iter().zip(&sweep.magnitude_db).zip(&sweep.phase_deg) {
        let _ = writeln!(csv, "{w},{m},{p}");
    }
    Ok(Output::json(json!({
        "input": args.pair[0],
        "output": args.pair[1],
        "omega_min": lo,
        "omega_max": hi,
        "points": args.points,
        "dc_gain_db": sweep.dc_gain_db,
        "cornering_omega": sweep.cornering_omega,
        "final_magnitude_db": sweep.magnitude_db.last(),
        "final_phase_deg": sweep.phase_deg.last(),
        "asymptotic": asymptotic,
        "asymptotic_note": note,
        "warning": sweep.warning,
    }))
    .with_csv("bode.csv", csv))
}

fn dcgain(ctx: &Context, args: &DcgainArgs) -> Result<Output> {
    let pair = ctx.pair(&args.pair)?;
    let gain = dc_gain(ctx.sys, pair)?;
    let mut out = json!({
        "input": args.pair[0],
        "output": args.pair[1],
        "inverse_entry": gain.inverse_entry,
        "gain_db": gain.gain_db,
        "phase_deg": gain.phase_deg,
    });
    if args.paths {
        let entry = dag_dc_entry(ctx.sys, pair)?;
        let terms: Vec<Value> = entry
            .terms
            .iter()
            .map(|t| json!({ "path": ctx.labels(&t.path), "term_value": t.term_value }))
            .collect();
        out["path_sum"] = json!(entry.value);
        out["paths"] = Value::Array(terms);
    }
    Ok(Output::json(out))
}

fn rank(ctx: &Context, args: &RankArgs) -> Result<Output> {
    let contrib = match args.side {
        SideArg::Input => input_contributions(ctx.sys)?,
        SideArg::Output => output_contributions(ctx.sys)?,
    };
    let direction = match args.direction {
        DirectionArg::Max => Direction::Maximize,
        DirectionArg::Min => Direction::Minimize,
    };
    let chosen = top_k(&contrib, args.k, direction)?;
    let total = contrib.total();
    let mut cumulative = 0.0;
    let rows: Vec<Value> = chosen
        .iter()
        .map(|&v| {
            cumulative += contrib.values[v];
            json!({
                "label": ctx.spec.label(v),
                "contribution": contrib.values[v],
                "cumulative_share": if total > 0.0 { cumulative / total } else { 0.0 },
            })
        })
        .collect();
    let fixed_side = match contrib.basis {
        Side::Input => "outputs",
        Side::Output => "inputs",
    };
    Ok(Output::json(json!({
        "side": args.side,
        "direction": args.direction,
        "k": args.k,
        "fixed_side": fixed_side,
        "fixed_set": ctx.labels(&contrib.fixed_set),
        "total": total,
        "subset_value": contrib.subset_value(&chosen),
        "ranking": rows,
    })))
}

fn sample(ctx: &Context, args: &SampleArgs) -> Result<Output> {
    let real = match &args.real_inputs {
        Some(path) => read_roles(path, ctx.spec.node_ids())?.0,
        None => ctx.sys.inputs().to_vec(),
    };
    if let Some(m) = args.m {
        if m != real.len() {
            return Err(Error::InvalidArgument(format!(
                "--m {m} differs from the {} real input(s)",
                real.len()
            )));
        }
    }
    let thresholds = Thresholds { p_value: args.p_threshold, z_score: args.z_threshold };
    if !(thresholds.p_value > 0.0 && thresholds.p_value < 1.0 && thresholds.z_score >= 0.0) {
        return Err(Error::InvalidArgument("thresholds need 0 < p < 1 and z ≥ 0".into()));
    }
    let contrib = input_contributions(ctx.sys)?;
    let stats = empirical_test_with(&contrib, &real, args.samples, ctx.seed, &thresholds)?;
    let mut csv = String::from("sample,trace\n");
    for (k, v) in stats.sample_values.iter().enumerate() {
        let _ = writeln!(csv, "{k},{v}");
    }
    let mut out = serde_json::to_value(&stats)?;
    out["real_inputs"] = json!(ctx.labels(&real));
    out["outputs"] = json!(ctx.labels(ctx.sys.outputs()));
    out["m"] = json!(real.len());
    Ok(Output::json(out).with_csv("samples.csv", csv))
}

fn structure(ctx: &Context) -> Result<Output> {
    let report = structural_report(ctx.spec)?;
    let order = ctx.spec.digraph().topological_order().map(|o| ctx.labels(&o).into_iter().map(String::from).collect::<Vec<_>>());
    let mut out = json!({
        "nodes": ctx.spec.node_count(),
        "edges": ctx.spec.edges().len(),
        "henrici_index": report.henrici_index,
        "is_dag": report.is_dag,
        "topological_order": order,
        "inputs": ctx.labels(ctx.spec.inputs()),
        "outputs": ctx.labels(ctx.spec.outputs()),
        "shortest_paths": report.shortest_paths,
    });
    if let [row] = report.shortest_paths.as_slice() {
        if let [d] = row.as_slice() {
            out["shortest_path"] = json!(d);
        }
    }
    Ok(Output::json(out))
}

fn simulate_cmd(ctx: &Context, args: &SimulateArgs) -> Result<Output> {
    let sys = ctx.sys;
    let column = match &args.input {
        Some(label) => {
            let node = ctx.node(label)?;
            sys.inputs().iter().position(|&v| v == node).ok_or_else(|| {
                Error::InvalidArgument(format!("`{label}` is not an input node"))
            })?
        }
        None => 0,
    };
    let base_step = 0.05 / sys.spectral_abscissa().abs().max(sys.a().norm());
    let (input, default_step) = match args.kind {
        KindArg::Impulse => {
            if args.omega.is_some() {
                return Err(Error::InvalidArgument("--omega applies only to --kind sin".into()));
            }
            (InputKind::Impulse { column }, base_step)
        }
        KindArg::Sin => {
            let omega = args
                .omega
                .ok_or_else(|| Error::InvalidArgument("--kind sin needs --omega".into()))?;
            if !(omega > 0.0 && omega.is_finite()) {
                return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
            }
            let period = 2.0 * std::f64::consts::PI / omega;
            (InputKind::Sinusoid { omega, column }, base_step.min(period / 40.0))
        }
    };
    let step = args.step.unwrap_or(default_step);
    let traj = simulate(sys, input, args.horizon, step)?;

    let outputs = ctx.labels(sys.outputs());
    let mut csv = String::from("t");
    for l in &outputs {
        let _ = write!(csv, ",y_{l}");
    }
    csv.push('\n');
    for (t, y) in traj.times.iter().zip(&traj.outputs) {
        let _ = write!(csv, "{t}");
        for v in y.iter() {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }

    let mut out = json!({
        "system": system_fields(ctx),
        "kind": args.kind,
        "input": ctx.spec.label(sys.inputs()[column]),
        "horizon": args.horizon,
        "step": step,
        "samples": traj.times.len(),
        "final_output": traj.outputs.last().map(|y| y.iter().copied().collect::<Vec<_>>()),
    });
    match args.kind {
        KindArg::Impulse => out["output_energy"] = json!(output_energy(&traj)),
        KindArg::Sin => {
            let omega = args.omega.unwrap_or_default();
            let rows = (0..outputs.len())
                .map(|r| {
                    steady_state_extract(&traj, omega, r)
                        .map(|s| json!({ "output": outputs[r], "amplitude": s.amplitude, "phase_deg": s.phase_deg }))
                })
                .collect::<Result<Vec<_>>>();
            match rows {
                Ok(rows) => out["steady_state"] = Value::Array(rows),
                Err(e @ Error::InsufficientHorizon(_)) => out["steady_state_note"] = json!(e.to_string()),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Output::json(out).with_csv("trajectory.csv", csv))
}

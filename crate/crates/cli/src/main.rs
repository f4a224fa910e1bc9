mod args;
mod commands;

use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use opennet::io::load_network;
use opennet::{Error, Result, ShiftPolicy, StableSystem};
use serde_json::{json, Map, Value};

use args::{Cli, ShiftArg};
use commands::{Context, Output};

const THREADS_VAR: &str = "OPENNET_THREADS";

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{THREADS_VAR} must be a non-negative integer, got `{raw}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn shift_policy(cli: &Cli) -> Result<ShiftPolicy> {
    match (cli.shift, cli.margin) {
        (ShiftArg::Normalize, None) => Ok(ShiftPolicy::Normalize),
        (_, Some(mu)) if mu > 0.0 && mu.is_finite() => Ok(ShiftPolicy::Margin(mu)),
        (_, Some(mu)) => Err(Error::InvalidArgument(format!("--margin must be positive, got {mu}"))),
        (ShiftArg::Margin, None) => Err(Error::InvalidArgument("--shift margin needs --margin MU".into())),
    }
}

fn config_echo(cli: &Cli, policy: ShiftPolicy) -> Result<Value> {
    Ok(json!({
        "network": cli.network.as_ref().map(|p| p.display().to_string()),
        "roles": cli.roles.as_ref().map(|p| p.display().to_string()),
        "shift": policy,
        "seed": cli.seed,
        "command": serde_json::to_value(&cli.command)?,
    }))
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    let policy = shift_policy(cli)?;
    let network = cli
        .network
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--network PATH is required".into()))?;
    for path in std::iter::once(network).chain(cli.roles.as_deref()) {
        if !path.exists() {
            return Err(Error::InvalidArgument(format!("cannot read `{}`", path.display())));
        }
    }
    let spec = load_network(network, cli.roles.as_deref())?;
    let sys = StableSystem::from_spec(&spec, policy)?;
    let ctx = Context { spec: &spec, sys: &sys, seed: cli.seed };
    let output = commands::run(&ctx, &cli.command)?;

    let mut doc = Map::new();
    doc.insert("tool".into(), json!("opennet"));
    doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    doc.insert("command".into(), json!(cli.command.name()));
    doc.insert("config".into(), config_echo(cli, policy)?);
    doc.extend(output.fields.clone());
    let text = serde_json::to_string_pretty(&Value::Object(doc))? + "\n";
    emit(cli.out.as_deref(), cli.command.name(), &text, &output)
}

fn emit(out: Option<&Path>, name: &str, json_text: &str, output: &Output) -> Result<()> {
    match out {
        None => {
            std::io::stdout().lock().write_all(json_text.as_bytes())?;
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{name}.json")), json_text)?;
            for (file, body) in &output.csv {
                std::fs::write(dir.join(file), body)?;
            }
        }
    }
    Ok(())
}

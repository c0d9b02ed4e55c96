use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use serde_json::json;

mod config;
mod output;
mod run;

use config::{Command, RunConfig};
use output::{Manifest, OutputDir};

/// Continuous wavelet transform and admissibility-free reconstruction.
///
/// Settings come from an optional `key = value` file and `--set key=value`
/// overrides, which win over the file. Run with `--keys` to list every key.
#[derive(Debug, Parser)]
#[command(name = "wavinv", version)]
struct Cli {
    #[arg(value_enum, required_unless_present = "keys")]
    command: Option<Command>,

    /// Configuration file with one `key = value` per line.
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override a configuration key; may be repeated.
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print the recognised configuration keys with their defaults.
    #[arg(long)]
    keys: bool,
}

enum Failure {
    Usage(Vec<String>),
    Run(anyhow::Error),
}

fn config_hash(cfg: &RunConfig) -> String {
    let canonical = json!({ "command": cfg.command, "config": cfg.resolved });
    output::sha256_hex(canonical.to_string().as_bytes())
}

fn load(cli: &Cli, command: Command) -> Result<RunConfig, Failure> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Usage(vec![format!("config file {}: {e}", path.display())])
            })?;
            config::parse_text(&text).map_err(Failure::Usage)?
        }
        None => Default::default(),
    };
    let mut errors = Vec::new();
    for flag in &cli.set {
        match config::parse_override(flag) {
            Ok((k, v)) => {
                raw.insert(k, v);
            }
            Err(e) => errors.push(e),
        }
    }
    match config::validate(command, &raw) {
        Ok(cfg) if errors.is_empty() => Ok(cfg),
        Ok(_) => Err(Failure::Usage(errors)),
        Err(more) => {
            errors.extend(more);
            Err(Failure::Usage(errors))
        }
    }
}

fn error_json(cfg: &RunConfig, e: &anyhow::Error) -> serde_json::Value {
    json!({
        "status": "error",
        "command": cfg.command,
        "kind": run::error_kind(e),
        "message": format!("{e:#}"),
    })
}

fn perform(cfg: &RunConfig) -> Result<serde_json::Value, Failure> {
    let mut dir = OutputDir::lock(&cfg.out).map_err(Failure::Run)?;
    let hash = config_hash(cfg);
    let inputs = run::input_records(cfg).map_err(Failure::Run)?;
    let staged = run::execute(cfg).and_then(|files| {
        for (name, bytes) in &files {
            dir.stage(name, bytes)?;
        }
        dir.commit()
    });
    let outputs = dir.records();
    let error = staged.as_ref().err().map(|e| error_json(cfg, e));
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.to_string(),
        status: if staged.is_ok() { "ok" } else { "failed" },
        config_hash: hash,
        config: &cfg.resolved,
        inputs: &inputs,
        outputs: if staged.is_ok() { &outputs } else { &[] },
        error,
        created_unix: output::unix_now(),
    };
    let written = dir.write_manifest(&manifest).context("writing manifest");
    staged.map_err(Failure::Run)?;
    written.map_err(Failure::Run)?;
    Ok(json!({
        "status": "ok",
        "command": cfg.command,
        "out": dir.path(),
        "config_hash": manifest.config_hash,
        "outputs": outputs.iter().map(|o| &o.file).collect::<Vec<_>>(),
    }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg =
                json!({ "status": "error", "kind": "usage", "message": e.to_string().trim() });
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    if cli.keys {
        for (key, default, help) in config::KEYS {
            println!("{key:<12} [{default}] {help}");
        }
        return ExitCode::SUCCESS;
    }
    let command = cli.command.expect("clap enforces a command");
    let result = load(&cli, command).and_then(|cfg| perform(&cfg));
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(errors)) => {
            let msg = json!({ "status": "error", "command": command, "kind": "validation", "errors": errors });
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            let msg = json!({
                "status": "error",
                "command": command,
                "kind": run::error_kind(&e),
                "message": format!("{e:#}"),
            });
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

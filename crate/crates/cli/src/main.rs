mod commands;
mod config;
mod error;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::{Context, Summary};
use crate::config::{PhaseName, RunConfig};
use crate::error::CliError;
use crate::output::Sink;

/// Light scattering from ultracold atoms in optical lattices.
#[derive(Parser, Debug)]
#[command(name = "lattice-light", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads; overrides run.threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Relative quadrature tolerance; overrides quadrature.rel_tol.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Override a configuration key, e.g. `--set phase.temperature=0.02`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Band energies, Wannier functions, J and U.
    Bands,
    /// Structure factor and photon rate on the angular grid.
    Map,
    /// Photons collected by the detector and inelastic rate over all angles.
    Collect,
    /// Noninteracting fermions: structure factor components.
    Fermi,
    /// Bogoliubov superfluid: structure factor components and spectrum.
    Superfluid,
    /// Mott insulator: structure factor components and ground-state proportion.
    Mott,
    /// Repetitions needed to resolve a temperature step.
    Thermometry,
    /// Built-in consistency checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Bands => "bands",
            Command::Map => "map",
            Command::Collect => "collect",
            Command::Fermi => "fermi",
            Command::Superfluid => "superfluid",
            Command::Mott => "mott",
            Command::Thermometry => "thermometry",
            Command::Selftest => "selftest",
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config(format!("`{}` needs --config <path>", cli.command.name())))?;
    let mut overrides = Vec::new();
    if let Some(n) = cli.threads {
        overrides.push(format!("run.threads={n}"));
    }
    if let Some(t) = cli.tolerance {
        overrides.push(format!("quadrature.rel_tol={t:e}"));
    }
    overrides.extend(cli.overrides.iter().cloned());
    let mut cfg = config::load(path, &overrides)?;
    let forced = match cli.command {
        Command::Fermi => Some(PhaseName::Fermi),
        Command::Superfluid => Some(PhaseName::Superfluid),
        Command::Mott => Some(PhaseName::Mott),
        _ => None,
    };
    if forced.is_some() {
        cfg.phase.kind = forced;
    }
    Ok(cfg)
}

fn init_threads(n: usize) -> Result<(), CliError> {
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn selftest(cli: &Cli) -> Result<(Vec<PathBuf>, Summary), CliError> {
    init_threads(cli.threads.unwrap_or(0))?;
    let checks = selftest::run()?;
    std::fs::create_dir_all(&cli.out)?;
    let doc = json!({
        "provenance": { "program": output::PROGRAM, "version": output::VERSION, "command": "selftest" },
        "checks": checks,
    });
    let path = cli.out.join("selftest.json");
    output::atomic_write(&path, format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()).as_bytes())?;
    for c in &checks {
        eprintln!("{} {}: {:.3e} (tolerance {:e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if !failed.is_empty() {
        return Err(CliError::SelfTest(format!("failed checks: {}", failed.join(", "))));
    }
    let mut s = Summary::new();
    s.insert("checks".into(), json!(checks.len()));
    Ok((vec![path], s))
}

fn execute(cli: &Cli) -> Result<(Vec<PathBuf>, Summary), CliError> {
    if let Command::Selftest = cli.command {
        return selftest(cli);
    }
    let cfg = resolve(cli)?;
    init_threads(cfg.run.threads)?;
    let mut sink = Sink::new(&cli.out, cli.command.name(), &cfg)?;
    let ctx = Context::new(cfg)?;
    let summary = match cli.command {
        Command::Bands => commands::bands(&ctx, &mut sink),
        Command::Map => commands::map(&ctx, &mut sink),
        Command::Collect => commands::collect(&ctx, &mut sink),
        Command::Fermi => commands::phase(&ctx, PhaseName::Fermi, &mut sink),
        Command::Superfluid => commands::phase(&ctx, PhaseName::Superfluid, &mut sink),
        Command::Mott => commands::phase(&ctx, PhaseName::Mott, &mut sink),
        Command::Thermometry => commands::thermometry(&ctx, &mut sink),
        Command::Selftest => unreachable!(),
    };
    match summary {
        Ok(s) => Ok((sink.written, s)),
        Err(e) => {
            // partial outputs stay on disk; report them with the error
            for p in &sink.written {
                log::warn!("wrote {}", p.display());
            }
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command = cli.command.name();
    match execute(&cli) {
        Ok((written, mut summary)) => {
            summary.insert("status".into(), json!("ok"));
            summary.insert("command".into(), json!(command));
            summary.insert("outputs".into(), json!(written));
            println!("{}", serde_json::Value::Object(summary));
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", json!({ "status": "error", "command": command, "category": e.category(), "message": e.to_string() }));
            eprintln!("error ({}): {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

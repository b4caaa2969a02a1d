//! `dirac-virial`: reproducible experiments driven by a JSON config.
//!
//! Exit codes: 0 on success (or an ABSENT/BOUNDED verdict), 2 on an
//! INCONCLUSIVE verdict, 1 on any error or failed check.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::Outcome;
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "dirac-virial", version, about = "Virial identities, certificates and smoothing experiments for Dirac operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the operator identity suite.
    Identities(Common),
    /// Evaluate the sufficient conditions for a potential.
    Certify(Common),
    /// Hardy and weighted-norm checks on a random corpus.
    Norms(Common),
    /// Time evolution with diagnostics.
    Evolve(Common),
    /// Gap eigenpairs and their virial residuals.
    Spectrum(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: `output.dir` from the config, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Smaller grids and sample counts.
    #[arg(long)]
    quick: bool,
    /// Print the resolved config and exit.
    #[arg(long)]
    dry_run: bool,
}

fn resolve(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::parse(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => ExperimentConfig::default_for_schema(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.quick {
        cfg.apply_quick();
    }
    if let Some(o) = &c.out {
        cfg.output.dir = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(report: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(report)?);
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    let (Command::Identities(c) | Command::Certify(c) | Command::Norms(c) | Command::Evolve(c) | Command::Spectrum(c)) =
        &cli.command;
    let cfg = resolve(c)?;
    if c.dry_run {
        emit(&cfg)?;
        return Ok(Outcome::Pass);
    }
    let out = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let outcome = match &cli.command {
        Command::Identities(_) => {
            let (r, o) = commands::identities(&cfg, &out)?;
            emit(&r)?;
            for f in r.checks.iter().filter(|c| !c.pass) {
                eprintln!("identity failed: {} (residual {:e} > {:e})", f.name, f.residual, f.tolerance);
            }
            o
        }
        Command::Certify(_) => {
            let (r, o) = commands::certify(&cfg, &out)?;
            emit(&r)?;
            o
        }
        Command::Norms(_) => {
            let (r, o) = commands::norms(&cfg, &out)?;
            emit(&r)?;
            o
        }
        Command::Evolve(_) => {
            let (r, o) = commands::evolve(&cfg, &out)?;
            emit(&r)?;
            o
        }
        Command::Spectrum(_) => {
            let (r, o) = commands::spectrum(&cfg, &out)?;
            emit(&r)?;
            o
        }
    };
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Inconclusive) => ExitCode::from(2),
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

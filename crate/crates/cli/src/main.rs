//! `fracwell`: drive simulations, well-landscape sweeps, ground-state solves,
//! trace analysis, and the property-verification suite from a flat key=value
//! config file.
//!
//! Exit codes: 0 success, 2 invalid config, 3 i/o failure, 4 invariant breach.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod io;
mod run;

use run::RunError;

#[derive(Parser)]
#[command(name = "fracwell", version, about = "magnetic fractional pseudo-parabolic laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to the key=value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Force fully reproducible execution (sequential reductions, fixed seed).
    #[arg(long)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve the configured initial datum and write trace + verdicts.
    Simulate(RunArgs),
    /// Compute the potential-well landscape (C*, h, M, d(δ)).
    Wells(RunArgs),
    /// Solve for a ground state by projected descent.
    Groundstate(RunArgs),
    /// Re-analyze an existing trace CSV against the configured problem.
    Analyze(RunArgs),
    /// Run the property-verification suites and report PASS/FAIL per suite.
    Verify(RunArgs),
}

fn dispatch(cmd: &Cmd) -> Result<(), ExitCode> {
    let args = match cmd {
        Cmd::Simulate(a) | Cmd::Wells(a) | Cmd::Groundstate(a) | Cmd::Analyze(a)
        | Cmd::Verify(a) => a,
    };
    let text = fs::read_to_string(&args.config).map_err(|e| {
        eprintln!("error: cannot read config {}: {e}", args.config.display());
        ExitCode::from(3)
    })?;
    let cfg = config::parse_config(&text).map_err(|errs| {
        for e in &errs.0 {
            eprintln!("config error: {e}");
        }
        ExitCode::from(2)
    })?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    fs::create_dir_all(&args.out).map_err(|e| {
        eprintln!("error: cannot create output dir {}: {e}", args.out.display());
        ExitCode::from(3)
    })?;
    let res = match cmd {
        Cmd::Simulate(_) => run::simulate(&cfg, &args.out, args.deterministic),
        Cmd::Wells(_) => run::wells(&cfg, &args.out, args.deterministic),
        Cmd::Groundstate(_) => run::groundstate(&cfg, &args.out, args.deterministic),
        Cmd::Analyze(_) => run::analyze(&cfg, &args.out, args.deterministic),
        Cmd::Verify(_) => run::verify(&cfg, &args.out, args.deterministic),
    };
    res.map_err(|e| {
        eprintln!("error: {e}");
        match e {
            RunError::Io(_) => ExitCode::from(3),
            RunError::Internal(_) => ExitCode::from(4),
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

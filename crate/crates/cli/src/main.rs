use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nlfp::cli_io::{
    output_root, parse_config, preset, run_convergence, run_experiment, verify_lemmas, RunConfig,
    RunManifest,
};

/// Fixed-point and finite-volume solvers for the nonlinear Fokker-Planck
/// equation with inhomogeneous temperature.
#[derive(Parser)]
#[command(name = "nlfp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Run a named preset, or print its config with --emit-config.
    Preset {
        /// equilibrium, linear_reduction, generic_benchmark or grain_bump
        name: String,
        #[arg(long)]
        emit_config: bool,
    },
    /// Randomized sweep of the Hölder decay and product inequalities.
    VerifyLemmas { config: PathBuf },
    /// Cross-solver discrepancy under dx -> dx/2, dt -> dt/4.
    Convergence {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

fn load(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing {}", path.display()))
}

fn report(m: &RunManifest) -> ExitCode {
    println!("output: {}", m.output_directory);
    for (name, ok) in &m.checks {
        println!("  {:<28} {}", name, if *ok { "pass" } else { "FAIL" });
    }
    for (name, v) in &m.metrics {
        println!("  {name:<28} {v:e}");
    }
    for e in &m.errors {
        println!("  error: {e}");
    }
    if m.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let manifest = match cli.command {
        Command::Run { config } => {
            let c = load(&config)?;
            run_experiment(&c, &output_root(&c))?
        }
        Command::Preset { name, emit_config } => {
            let c = preset(&name)?;
            if emit_config {
                print!("{}", c.to_toml()?);
                return Ok(ExitCode::SUCCESS);
            }
            run_experiment(&c, &output_root(&c))?
        }
        Command::VerifyLemmas { config } => {
            let c = load(&config)?;
            verify_lemmas(&c, &output_root(&c))?
        }
        Command::Convergence { config, levels } => {
            let c = load(&config)?;
            run_convergence(&c, levels, &output_root(&c))?
        }
    };
    Ok(report(&manifest))
}

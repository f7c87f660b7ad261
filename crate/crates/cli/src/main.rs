//! `nsm`: command-line driver for the manifold Navier-Stokes solver.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ns_manifold::geometry::ChartKind;
use ns_manifold::killing::AlphaKind;

use crate::config::{load_config, AlphaOptions, Job, Preset, VerifyOptions};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nsm", version, about = "Navier-Stokes on the sphere and torus with selectable vector diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the simulation (or suite) described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Identity suite with residuals and convergence orders.
    Verify {
        /// One chart only (sphere, torus, perturbed_sphere).
        #[arg(long)]
        chart: Option<ChartKind>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral estimates of the constants alpha_P, alpha_K, alpha_H.
    Alpha {
        #[arg(long)]
        kind: Option<AlphaKind>,
        #[arg(long, default_value_t = 15)]
        lmax: usize,
        #[arg(long, default_value = "sphere")]
        chart: ChartKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a config once per diffusion operator and tabulate the contrast.
    CompareOperators {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the scenario presets with their resolved defaults.
    Presets,
}

fn run_job(job: Job, out: Option<PathBuf>) -> Result<(), CliError> {
    match job {
        Job::Simulate { preset, config } => {
            let dir = commands::output_dir(out.as_deref(), config.output_dir.as_deref());
            let summary = commands::run_simulation(&config, preset, &dir)?;
            print!("{summary}");
            Ok(())
        }
        Job::Verify(opts) => verify(&opts, out),
        Job::Alpha(opts) => {
            print!("{}", commands::alpha(&opts, out.as_deref())?);
            Ok(())
        }
    }
}

fn verify(opts: &VerifyOptions, out: Option<PathBuf>) -> Result<(), CliError> {
    let (text, passed) = commands::verify(opts, out.as_deref())?;
    print!("{text}");
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification("identity suite failed".into()))
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out } => run_job(load_config(&config)?, out),
        Command::Verify { chart, seed, out } => verify(&VerifyOptions { chart, seed, output_dir: None }, out),
        Command::Alpha { kind, lmax, chart, out } => {
            let opts = AlphaOptions { kind, chart, lmax, output_dir: None };
            print!("{}", commands::alpha(&opts, out.as_deref())?);
            Ok(())
        }
        Command::CompareOperators { config, out } => match load_config(&config)? {
            Job::Simulate { preset, config } => {
                let dir = commands::output_dir(out.as_deref(), config.output_dir.as_deref());
                print!("{}", commands::compare_operators(&config, preset, &dir)?);
                Ok(())
            }
            _ => Err(CliError::config("preset", "compare-operators needs a simulation preset")),
        },
        Command::Presets => {
            for p in Preset::ALL {
                match p.sim_config() {
                    Some(c) => println!("{p}: {}", serde_json::to_string(&c).expect("config serializes")),
                    None => println!("{p}: suite"),
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

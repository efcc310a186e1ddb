use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use wildorbit_lab::config::ExperimentConfig;
use wildorbit_lab::run::{run_experiment, run_spectrum, run_suites};
use wildorbit_lab::spectral::backward_shift_demo;

/// Orbit-dichotomy laboratory: experiment runner, property suites, and
/// spectral diagnostics for compact perturbations of the identity.
#[derive(Parser)]
#[command(name = "wilddyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run { config: PathBuf },
    /// Run the property suites, optionally a single named module.
    Suite {
        #[arg(long)]
        module: Option<String>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Eigensolve the configured operator truncation and write spectrum.csv.
    Spectrum { config: PathBuf },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: DemoCommand,
    },
}

#[derive(Subcommand)]
enum DemoCommand {
    /// The weighted backward shift: annihilated orbits despite unbounded
    /// power norms.
    BackwardShift {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        horizon: usize,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let outcome = run_experiment(&cfg)?;
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            Ok(outcome.all_pass)
        }
        Command::Suite { module, seed } => {
            let (suites, all_pass) = run_suites(module.as_deref(), seed)?;
            for s in &suites {
                for c in &s.checks {
                    println!(
                        "{}::{} {}{}",
                        s.name,
                        c.name,
                        if c.pass { "PASS" } else { "FAIL" },
                        if c.detail.is_empty() {
                            String::new()
                        } else {
                            format!(" ({})", c.detail)
                        }
                    );
                }
            }
            Ok(all_pass)
        }
        Command::Spectrum { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let outcome = run_spectrum(&cfg)?;
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            Ok(outcome.all_pass)
        }
        Command::Demo { which } => match which {
            DemoCommand::BackwardShift { p, horizon } => {
                let report = backward_shift_demo(p, horizon)?;
                println!(
                    "weighted backward shift on l^{p}: B e_i = (i/(i-1))^(1/p) e_(i-1)"
                );
                println!(
                    "finitely supported orbits annihilate: {}",
                    if report.annihilation_verified {
                        "verified"
                    } else {
                        "FAILED"
                    }
                );
                let t = report.power_norms.len();
                println!(
                    "||B^{t}|| on truncations = {:.6} (grows without bound)",
                    report.power_norms[t - 1]
                );
                println!(
                    "partial sums of 1/||B^k|| at T={t}: {:.6} (still climbing: +{:.6})",
                    report.inverse_norm_sums[t - 1],
                    report.inverse_norm_sums[t - 1] - report.inverse_norm_sums[t - 2]
                );
                Ok(report.annihilation_verified)
            }
        },
    }
}

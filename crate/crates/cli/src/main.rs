mod args;
mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use args::{Cli, Command};
use config::{eps_grid, Parts, RunConfig};
use error::CliError;

const DEFAULT_EPS: [f64; 4] = [0.3, 0.2, 0.1, 0.05];

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eigs(a) => {
            let cfg = RunConfig::resolve(Parts {
                command: "eigs",
                process: &a.process,
                max_weights: 1,
                spectrum: Some(&a.spectrum),
                default_count: 10,
                eps: Vec::new(),
                sampling: None,
                default_samples: 1,
                output: &a.output,
            })?;
            commands::eigs(&cfg)
        }
        Command::Theta(a) => {
            let cfg = RunConfig::resolve(Parts {
                command: "theta",
                process: &a.process,
                max_weights: 2,
                spectrum: None,
                default_count: 1,
                eps: Vec::new(),
                sampling: None,
                default_samples: 1,
                output: &a.output,
            })?;
            commands::theta(&cfg)
        }
        Command::Compare(a) => {
            let eps = if a.eps.eps.is_some() || a.eps.eps_start.is_some() { eps_grid(&a.eps, &[])? } else { Vec::new() };
            let cfg = RunConfig::resolve(Parts {
                command: "compare",
                process: &a.process,
                max_weights: 2,
                spectrum: Some(&a.spectrum),
                default_count: 200,
                eps,
                sampling: None,
                default_samples: 1,
                output: &a.output,
            })?;
            commands::compare(&cfg, a.tol)
        }
        Command::Asympt(a) => {
            let cfg = RunConfig::resolve(Parts {
                command: "asympt",
                process: &a.process,
                max_weights: 1,
                spectrum: None,
                default_count: 1,
                eps: eps_grid(&a.eps, &DEFAULT_EPS)?,
                sampling: None,
                default_samples: 1,
                output: &a.output,
            })?;
            commands::asympt(&cfg)
        }
        Command::Prob(a) => {
            let cfg = RunConfig::resolve(Parts {
                command: "prob",
                process: &a.process,
                max_weights: 1,
                spectrum: Some(&a.spectrum),
                default_count: 200,
                eps: eps_grid(&a.eps, &DEFAULT_EPS)?,
                sampling: None,
                default_samples: 1,
                output: &a.output,
            })?;
            commands::prob(&cfg)
        }
        Command::Mc(a) => {
            let cfg = RunConfig::resolve(Parts {
                command: "mc",
                process: &a.process,
                max_weights: 1,
                spectrum: Some(&a.spectrum),
                default_count: 200,
                eps: eps_grid(&a.eps, &DEFAULT_EPS)?,
                sampling: Some(&a.sampling),
                default_samples: 100_000,
                output: &a.output,
            })?;
            commands::mc(&cfg)
        }
        Command::Validate(a) => {
            let cfg = RunConfig::resolve(Parts {
                command: "validate",
                process: &a.process,
                max_weights: 1,
                spectrum: Some(&a.spectrum),
                default_count: 300,
                eps: Vec::new(),
                sampling: Some(&a.sampling),
                default_samples: 200_000,
                output: &a.output,
            })?;
            commands::validate(&cfg)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

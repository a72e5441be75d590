//! Experiment drivers for `ymh-core`: config parsing, deterministic outputs and
//! the checks behind each subcommand.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod random;

use std::path::PathBuf;

use config::ExperimentConfig;
use error::CliError;
use experiments::Report;
use output::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Vortex,
    Minimize,
    Gamma,
    Monotonicity,
    Width,
    FlatNorm,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Vortex => "vortex",
            Experiment::Minimize => "minimize",
            Experiment::Gamma => "gamma",
            Experiment::Monotonicity => "monotonicity",
            Experiment::Width => "width",
            Experiment::FlatNorm => "flatnorm",
        }
    }
}

/// Runs one experiment into `cfg.output_dir` and finishes the manifest.
pub fn run_experiment(which: Experiment, cfg: &ExperimentConfig) -> Result<(Report, PathBuf), CliError> {
    let mut cfg = cfg.clone();
    cfg.experiment = which.name().to_string();
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let report = match which {
        Experiment::Vortex => experiments::vortex::run(&cfg, &mut out)?,
        Experiment::Minimize => experiments::minimize::run(&cfg, &mut out)?.1,
        Experiment::Gamma => experiments::gamma::run(&cfg, &mut out)?,
        Experiment::Monotonicity => experiments::monotonicity::run_experiment(&cfg, &mut out)?,
        Experiment::Width => experiments::width::run_experiment(&cfg, &mut out)?,
        Experiment::FlatNorm => experiments::flatnorm::run_experiment(&cfg, &mut out)?,
    };
    out.write("checks.csv", report.csv().as_bytes())?;
    let dir = out.finish(&cfg)?;
    Ok((report, dir))
}

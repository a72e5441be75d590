use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ymh_cli::config::ExperimentConfig;
use ymh_cli::error::{CliError, EXIT_ACCEPTANCE};
use ymh_cli::{run_experiment, Experiment};

#[derive(Parser)]
#[command(name = "ymh", version, about = "Lattice experiments for the self-dual abelian Higgs energy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit with status 4 when a check fails.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Radial profiles, quantization and discrepancy refinement.
    Vortex,
    /// Gradient-flow minimization in the configured sector.
    Minimize,
    /// Recovery and liminf ledgers.
    Gamma,
    /// Ψ profiles on T², density ratios on T³.
    Monotonicity,
    /// Sweep-out energy against the brute-force width.
    Width,
    /// Flat norm against exhaustive matching, and metric axioms.
    Flatnorm,
    /// Print the version and the resolved config.
    Info,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn main_inner(cli: &Cli) -> Result<i32, CliError> {
    let cfg = load(cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let which = match cli.command {
        Command::Vortex => Experiment::Vortex,
        Command::Minimize => Experiment::Minimize,
        Command::Gamma => Experiment::Gamma,
        Command::Monotonicity => Experiment::Monotonicity,
        Command::Width => Experiment::Width,
        Command::Flatnorm => Experiment::FlatNorm,
        Command::Info => {
            println!("ymh-cli {}", env!("CARGO_PKG_VERSION"));
            println!("ymh-core {}", ymh_core::VERSION);
            print!("{}", cfg.to_text());
            return Ok(0);
        }
    };
    let (report, dir) = run_experiment(which, &cfg)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {}", dir.display());
    Ok(if cli.strict && !report.passed() { EXIT_ACCEPTANCE } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

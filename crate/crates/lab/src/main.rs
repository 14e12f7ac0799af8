use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kdv5_lab::output::OutputDir;
use kdv5_lab::{tasks, ExperimentConfig, LabError, LabResult, Report};

#[derive(Parser)]
#[command(name = "kdv5", version, about = "Spectral laboratory for the periodic fifth-order KdV equation")]
struct Cli {
    /// TOML experiment file; the built-in defaults are used without it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides the seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the initial datum and monitor the conserved quantities.
    Simulate,
    /// Exhaustive integer scans of the resonance factorizations.
    Resonance {
        /// Scan every |n_i| up to this bound.
        #[arg(long)]
        exhaustive: Option<i64>,
    },
    /// Gauge transform round trip, phase check and bicontinuity ladder.
    Gauge,
    /// Short-time norms, embedding ratio and block-estimate sweep.
    Norms,
    /// Modified energy ledger, comparability and commutator scan.
    Energy,
    /// Ratio scans of the bilinear counterexample.
    Counterexample {
        /// Scan a single b on the branch that fails for it.
        #[arg(long)]
        b: Option<f64>,
    },
    /// The full acceptance suite.
    All,
}

fn run(cli: &Cli) -> LabResult<Report> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(e.to_string()))?;
    }
    let out = OutputDir::create(&cli.out)?;
    let report = match &cli.command {
        Command::Simulate => tasks::simulate(&cfg, &out)?,
        Command::Resonance { exhaustive } => tasks::resonance(&cfg, &out, *exhaustive)?,
        Command::Gauge => tasks::gauge(&cfg, &out)?,
        Command::Norms => tasks::norms(&cfg, &out)?,
        Command::Energy => tasks::energy(&cfg, &out)?,
        Command::Counterexample { b } => tasks::counterexample(&cfg, &out, *b)?,
        Command::All => tasks::all(cfg.seed, &out)?,
    };
    out.json("report.json", &report)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for inv in &report.invariants {
                let tag = if inv.passed { "ok  " } else { "FAIL" };
                println!("{tag} {}: {:e} ({})", inv.name, inv.value, inv.condition);
            }
            let failures: Vec<_> = report.failures().collect();
            if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in failures {
                    eprintln!("invariant failed: {} at {}", f.name, f.pointer.as_deref().unwrap_or("report.json"));
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

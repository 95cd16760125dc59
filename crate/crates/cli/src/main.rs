use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use corrimg::runner::{
    detection_positions, evaluate_oracle, run, validate, write_oracle_csv, write_outputs,
    ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "corrimg", version, about = "Correlated-imaging Monte-Carlo simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write G.csv, stats.csv and manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Single-threaded, with no wall time in the manifest.
        #[arg(long)]
        deterministic: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Check a config and list every violation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the analytic correlation for a config as CSV.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(path).with_context(|| format!("reading {}", path.display()))
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, shots, seed, threads, deterministic, out_dir } => {
            let mut cfg = load(&config)?;
            if let Some(s) = shots {
                cfg.shots = s;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            cfg.deterministic |= deterministic;
            let out = run(&cfg)?;
            write_outputs(&out_dir, &out)
                .with_context(|| format!("writing outputs to {}", out_dir.display()))?;
            eprintln!(
                "{} shots written to {}",
                out.g.n_shots,
                out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let violations = validate(&cfg);
            let mut stdout = io::stdout().lock();
            if violations.is_empty() {
                writeln!(stdout, "ok")?;
                return Ok(ExitCode::SUCCESS);
            }
            for v in &violations {
                writeln!(stdout, "{}: {}", v.code, v.message)?;
            }
            Ok(ExitCode::FAILURE)
        }
        Command::Oracle { config } => {
            let cfg = load(&config)?;
            let x2 = detection_positions(&cfg)?;
            let g = evaluate_oracle(&cfg)?;
            write_oracle_csv(&mut io::stdout().lock(), &x2, &g)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

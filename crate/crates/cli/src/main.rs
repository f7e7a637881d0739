use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use witamp_cli::checks::{describe, run_check, CheckOptions, CHECK_NAMES};
use witamp_cli::config::{load_config, DEFAULT_MAX_QUBITS};
use witamp_cli::{run, Failure};
use witamp_core::verifier::{haar_instance, no_instance, yes_instance};
use witamp_core::{parameter_schedule, Budget, Construction, Cutoff, PipelineConfig};

#[derive(Parser)]
#[command(name = "witamp", version, about = "Witness-preserving amplification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pipeline over the configured instances and write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_qubits: Option<u32>,
    },
    /// Run a named property check on seeded random instances.
    Verify {
        /// Check name; `list` prints all of them.
        name: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Error exponent for lemma and end-to-end checks.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 0.99)]
        c: f64,
        #[arg(long, default_value_t = 0.01)]
        s: f64,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
        max_qubits: u32,
    },
    /// Print the parameter schedule of a pipeline.
    Schedule {
        #[arg(long, conflicts_with_all = ["construction", "p", "c", "s", "cutoff"])]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_construction)]
        construction: Option<Construction>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 0.99)]
        c: f64,
        #[arg(long, default_value_t = 0.01)]
        s: f64,
        #[arg(long, value_parser = parse_cutoff)]
        cutoff: Option<Cutoff>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded random instance as JSON.
    Gen {
        #[arg(long, value_enum, default_value_t = Kind::Yes)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.99)]
        c: f64,
        #[arg(long, default_value_t = 0.01)]
        s: f64,
        #[arg(long, default_value_t = 1)]
        witness_width: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Yes,
    No,
    Haar,
}

fn parse_construction(s: &str) -> Result<Construction, String> {
    s.parse().map_err(|e: witamp_core::Error| e.to_string())
}

fn parse_cutoff(s: &str) -> Result<Cutoff, String> {
    s.parse().map_err(|e: witamp_core::Error| e.to_string())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            seed,
            out,
            max_qubits,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let budget = Budget {
                max_qubits: max_qubits.or(cfg.max_qubits).unwrap_or(DEFAULT_MAX_QUBITS),
                ..Budget::default()
            };
            let outcome = run::execute(&cfg, &budget)?;
            let dir = out.or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("witamp-report"));
            outcome.write(&dir)?;
            print!("{}", outcome.table());
            println!("reports written to {}", dir.display());
            if outcome.all_met() {
                Ok(())
            } else {
                let failed = outcome.rows.iter().filter(|r| !r.met).count();
                Err(Failure::Bounds(format!("{failed} of {} rows missed their bound", outcome.rows.len())))
            }
        }
        Command::Verify {
            name,
            trials,
            seed,
            tol,
            p,
            c,
            s,
            out,
            max_qubits,
        } => {
            if name == "list" {
                for n in CHECK_NAMES {
                    println!("{n:<12} {}", describe(n).unwrap_or_default());
                }
                return Ok(());
            }
            let opts = CheckOptions {
                trials,
                seed,
                tol,
                p,
                c,
                s,
                max_qubits,
            };
            let report = run_check(&name, &opts)?;
            print!("{}", report.table());
            if let Some(path) = out {
                emit(&report.to_json()?, Some(&path))?;
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Bounds(format!("{name}: worst residual {:.3e}", report.worst_residual)))
            }
        }
        Command::Schedule {
            config,
            construction,
            p,
            c,
            s,
            cutoff,
            out,
        } => {
            let cfg = match (config, construction, p) {
                (Some(path), _, _) => load_config(&path)?.pipeline(),
                (None, Some(construction), Some(p)) => PipelineConfig {
                    cutoff,
                    ..PipelineConfig::new(construction, p, c, s)
                },
                _ => return Err(Failure::Invalid("schedule needs --config, or --construction and --p".into())),
            };
            emit(&(parameter_schedule(&cfg)?.to_json()? + "\n"), out.as_ref())
        }
        Command::Gen {
            kind,
            seed,
            c,
            s,
            witness_width,
            out,
        } => {
            if !(1..=6).contains(&witness_width) {
                return Err(Failure::Invalid(format!("--witness-width {witness_width} outside [1, 6]")));
            }
            let v = match kind {
                Kind::Yes => yes_instance(c, witness_width, seed)?,
                Kind::No => no_instance(s, witness_width, seed)?,
                Kind::Haar => haar_instance(witness_width, seed)?,
            };
            emit(&(v.to_json()? + "\n"), out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

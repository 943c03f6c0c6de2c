//! Batch driver: `snls run <config>`, `snls check-hypothesis <config>`,
//! `snls compare <reportA> <reportB>`, `snls estimate-k <config>`.
//!
//! Exit codes: 0 pass, 1 acceptance failure, 2 configuration/certification
//! abort.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use snls::config::{parse_config_file, ResolvedConfig};
use snls::experiment::{self, EXIT_CONFIG_ABORT};

#[derive(Parser)]
#[command(name = "snls", version, about = "stochastic NLS simulator and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Override the ensemble master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment preset from a JSON config (or saved manifest).
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Certify the noise hypotheses for a config without simulating.
    CheckHypothesis {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Contrast a stochastic report with a deterministic baseline report.
    Compare {
        no_blowup_report: PathBuf,
        blowup_report: PathBuf,
    },
    /// Estimate the empirical nonlinearity constant for a config.
    EstimateK {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn resolve(path: &PathBuf, overrides: &Overrides) -> snls::Result<ResolvedConfig> {
    let cfg = parse_config_file(path)?;
    let mut resolved = cfg.resolve()?;
    if let Some(seed) = overrides.seed {
        resolved.ensemble.master_seed = seed;
        resolved.defaults_applied.push(format!("--seed {seed}"));
    }
    if let Some(paths) = overrides.paths {
        resolved.ensemble.n_paths = paths;
        resolved.defaults_applied.push(format!("--paths {paths}"));
    }
    if let Some(out) = &overrides.out {
        resolved.output_dir = out.clone();
        resolved
            .defaults_applied
            .push(format!("--out {}", out.display()));
    }
    if let Some(workers) = overrides.workers {
        resolved.ensemble.workers = Some(workers);
        resolved.defaults_applied.push(format!("--workers {workers}"));
    }
    Ok(resolved)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_CONFIG_ABORT
        }
    };
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> snls::Result<i32> {
    match cli.command {
        Command::Run { config, overrides } => {
            let resolved = resolve(&config, &overrides)?;
            let outcome = experiment::run_experiment(&resolved)?;
            match &outcome.aborted {
                Some(reason) => eprintln!("{}: aborted: {reason}", outcome.preset),
                None => println!(
                    "{}: {} (outputs in {})",
                    outcome.preset,
                    if outcome.pass { "pass" } else { "FAIL" },
                    outcome.output_dir.display()
                ),
            }
            Ok(outcome.exit_code)
        }
        Command::CheckHypothesis { config, overrides } => {
            let mut resolved = resolve(&config, &overrides)?;
            resolved.preset = snls::config::Preset::HypothesisCheck;
            let outcome = experiment::run_experiment(&resolved)?;
            let report = std::fs::read_to_string(outcome.output_dir.join("report.json"))?;
            println!("{report}");
            Ok(outcome.exit_code)
        }
        Command::Compare {
            no_blowup_report,
            blowup_report,
        } => {
            let a: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&no_blowup_report)?)?;
            let b: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&blowup_report)?)?;
            let contrast = experiment::compare_presets(&a, &b)?;
            println!("{contrast:#}");
            let observed = contrast["verdict"] == "noise-regularization observed";
            Ok(if observed { 0 } else { 1 })
        }
        Command::EstimateK { config, overrides } => {
            let resolved = resolve(&config, &overrides)?;
            let report = experiment::estimate_k_report(&resolved)?;
            println!("{report:#}");
            Ok(0)
        }
    }
}

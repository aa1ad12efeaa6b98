use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orc_cli::fit::{fit_loglog, read_points, LogFactor};
use orc_cli::output::write_outputs;
use orc_cli::{run_experiment, Chain, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "orc", version = orc_cli::output::VERSION, about = "Seeded experiments over convex-body oracle reductions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write `<experiment>.csv` and `<experiment>.summary.json`.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Write 0 in the wall_ms column so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Fit the slope of log(y / log-factor) against log(x).
    FitScaling {
        csv: PathBuf,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "mem_calls")]
        y: String,
        /// For example `log(1/eps)`; `1` for none.
        #[arg(long, default_value = "1")]
        log_factor: String,
    },
    /// List the reduction chains a config can name.
    ListChains,
    /// Parse and validate a config without running it.
    ValidateConfig { config: PathBuf },
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &PathBuf) -> Result<(ExperimentConfig, Chain), Failure> {
    let cfg = ExperimentConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?;
    let chain = cfg.chain().map_err(|e| Failure::Config(e.to_string()))?;
    Ok((cfg, chain))
}

fn run(command: Command) -> Result<(), Failure> {
    let runtime = |e: &dyn std::fmt::Display| Failure::Runtime(e.to_string());
    match command {
        Command::Run {
            config,
            out,
            no_timing,
            jobs,
        } => {
            let (cfg, chain) = load(&config)?;
            let options = RunOptions {
                jobs,
                timing: !no_timing,
            };
            let records = run_experiment(&cfg, chain, options).map_err(|e| runtime(&e))?;
            let (csv, json) =
                write_outputs(&out, &cfg, &records, options.timing).map_err(|e| runtime(&e))?;
            println!("{} rows -> {}", records.len(), csv.display());
            println!("summary -> {}", json.display());
        }
        Command::FitScaling {
            csv,
            x,
            y,
            log_factor,
        } => {
            let factor = LogFactor::parse(&log_factor).map_err(|e| runtime(&e))?;
            let file = std::fs::File::open(&csv)
                .map_err(|e| runtime(&format!("{}: {e}", csv.display())))?;
            let points = read_points(file, &x, &y, &factor).map_err(|e| runtime(&e))?;
            let fit = fit_loglog(&points).map_err(|e| runtime(&e))?;
            let (lo, hi) = fit.interval();
            println!(
                "slope {:.4} ± {:.4} (95% CI [{lo:.4}, {hi:.4}]), {} points, {} distinct {x}",
                fit.slope, fit.half_width, fit.points, fit.distinct_x
            );
        }
        Command::ListChains => {
            for chain in Chain::ALL {
                let input = if chain.needs_function() {
                    "function"
                } else {
                    "body"
                };
                println!("{:<24} [{input}] {}", chain.name(), chain.description());
            }
        }
        Command::ValidateConfig { config } => {
            let (cfg, chain) = load(&config)?;
            println!(
                "ok: {} runs {} for {} rows, hash {}",
                cfg.experiment,
                chain.name(),
                cfg.row_count(),
                cfg.hash()
            );
        }
    }
    Ok(())
}

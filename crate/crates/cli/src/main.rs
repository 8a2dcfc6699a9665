//! Command-line front end: predictions, free-front shooting, direct
//! simulation, continuation of trigger fronts and their cross-validation.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::Config;
use crate::failure::Failure;
use crate::output::Output;

#[derive(Debug, Parser)]
#[command(name = "cgl-trigger", version, about = "Trigger fronts in the complex Ginzburg-Landau equation")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// TOML configuration; defaults apply to anything not given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Base seed for random initial data (speed i uses seed + i).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Long domain (L = 2400) and run time (t = 5000) for simulations.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Verb {
    /// Closed-form predictions over a speed grid (and optional γ sweep).
    Predict,
    /// Free-front shooting over a γ̂ grid (and optional threshold sweep).
    Shoot,
    /// Direct simulation with wake measurement.
    Simulate,
    /// Trigger-front branch by collocation and continuation in c.
    Continue,
    /// Joined table of simulation, continuation and predictions plus the
    /// power-law fit of the frequency correction.
    Compare,
}

impl Verb {
    fn name(self) -> &'static str {
        match self {
            Self::Predict => "predict",
            Self::Shoot => "shoot",
            Self::Simulate => "simulate",
            Self::Continue => "continue",
            Self::Compare => "compare",
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    let mut cfg = Config::load(cli.config.as_deref())?;
    if cli.paper_scale {
        cfg.apply_paper_scale();
    }
    let ctx = Context { cfg, out: Output::create(&cli.out)?, seed: cli.seed, paper_scale: cli.paper_scale };
    match cli.verb {
        Verb::Predict => commands::predict(&ctx),
        Verb::Shoot => commands::shoot(&ctx),
        Verb::Simulate => commands::simulate(&ctx),
        Verb::Continue => commands::continuation(&ctx),
        Verb::Compare => commands::compare(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            if f.exit_code() == 3 {
                let diag = serde_json::json!({ "command": cli.verb.name(), "kind": f.kind(), "error": f.to_string() });
                let path = cli.out.join("diagnostics.json");
                if std::fs::create_dir_all(&cli.out).and_then(|_| std::fs::write(&path, format!("{diag:#}\n"))).is_ok() {
                    eprintln!("diagnostics written to {}", path.display());
                }
            }
            ExitCode::from(f.exit_code())
        }
    }
}

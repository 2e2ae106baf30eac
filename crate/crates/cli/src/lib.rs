//! Command-line driver for the signature-kernel hedging pipeline.
//!
//! `simulate` writes train and test paths, `fit` solves one model per
//! training size, `evaluate` hedges the test set with one model, and
//! `compare` tabulates every model against the delta hedge.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::Failure;

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "SIGHEDGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sighedge", version, about = "Signature-kernel quadratic hedging")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate training and test paths
    Simulate,
    /// Fit hedging models on the training paths
    Fit {
        /// Fit only this training size
        #[arg(long)]
        n: Option<usize>,
    },
    /// Hedge the test paths with a fitted model
    Evaluate {
        /// Model size to evaluate (default: largest train size)
        #[arg(long)]
        n: Option<usize>,
    },
    /// Compare every fitted model with the delta hedge
    Compare,
}

/// Config file plus per-key overrides; flags win over the file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Config file of `key = value` lines
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub s0: Option<String>,
    #[arg(long, global = true)]
    pub sigma: Option<String>,
    #[arg(long = "horizon-years", global = true)]
    pub horizon_years: Option<String>,
    #[arg(long, global = true)]
    pub steps: Option<String>,
    #[arg(long, global = true)]
    pub dim: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// call | put | asian-call
    #[arg(long, global = true)]
    pub payoff: Option<String>,
    #[arg(long, global = true)]
    pub strike: Option<String>,
    #[arg(long, global = true)]
    pub coordinate: Option<String>,
    /// Comma-separated list, e.g. 10,50,100,200
    #[arg(long = "train-sizes", global = true)]
    pub train_sizes: Option<String>,
    #[arg(long = "test-count", global = true)]
    pub test_count: Option<String>,
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    /// Kernel PDE substeps per sample step
    #[arg(long, global = true)]
    pub refinement: Option<String>,
    /// bs | train-mean | <number>
    #[arg(long, global = true)]
    pub pi0: Option<String>,
    #[arg(long = "eval-path", global = true)]
    pub eval_path: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<String>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("s0", &self.s0),
            ("sigma", &self.sigma),
            ("horizon-years", &self.horizon_years),
            ("steps", &self.steps),
            ("dim", &self.dim),
            ("seed", &self.seed),
            ("payoff", &self.payoff),
            ("strike", &self.strike),
            ("coordinate", &self.coordinate),
            ("train-sizes", &self.train_sizes),
            ("test-count", &self.test_count),
            ("lambda", &self.lambda),
            ("refinement", &self.refinement),
            ("pi0", &self.pi0),
            ("eval-path", &self.eval_path),
            ("out", &self.out),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when set.
pub fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::config(format!("cannot start thread pool: {e}")))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into())
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let cfg = cli.overrides.resolve()?;
    match cli.command {
        Command::Simulate => {
            let r = commands::simulate(&cfg)?;
            println!(
                "simulated {} training and {} test paths ({})",
                r.train,
                r.test,
                r.manifest.display()
            );
        }
        Command::Fit { n } => {
            for r in commands::fit(&cfg, n)? {
                println!(
                    "n={:<5} pi0={:.6} residual={:.3e}{} -> {}",
                    r.n,
                    r.pi0,
                    r.residual,
                    if r.beta_is_zero { " beta=0" } else { "" },
                    r.model.display()
                );
            }
        }
        Command::Evaluate { n } => {
            let r = commands::evaluate(&cfg, n)?;
            let e = &r.evaluation;
            println!("model n={} on {} test paths", r.n, e.kernel.len());
            println!("{:<8} {:>13} {:>13}", "", "kernel", "delta");
            let rows = [
                ("mean", e.kernel.mean, e.delta.as_ref().map(|d| d.mean)),
                ("std", e.kernel.std, e.delta.as_ref().map(|d| d.std)),
                ("q05", e.kernel.q05, e.delta.as_ref().map(|d| d.q05)),
                ("q50", e.kernel.q50, e.delta.as_ref().map(|d| d.q50)),
                ("q95", e.kernel.q95, e.delta.as_ref().map(|d| d.q95)),
            ];
            for (name, k, d) in rows {
                println!("{name:<8} {k:>13.6e} {:>13}", fmt_opt(d));
            }
            println!("pnl: {}", r.pnl_file.display());
            println!("positions: {}", r.positions_file.display());
        }
        Command::Compare => {
            let (rows, file) = commands::compare(&cfg)?;
            println!("{:>6} {:>13} {:>13} {:>13}", "n", "std_kernel", "std_delta", "pos_error");
            for r in &rows {
                println!(
                    "{:>6} {:>13.6e} {:>13} {:>13}",
                    r.n,
                    r.std_kernel,
                    fmt_opt(r.std_delta),
                    fmt_opt(r.mean_abs_position_error)
                );
            }
            println!("written: {}", file.display());
        }
    }
    Ok(())
}

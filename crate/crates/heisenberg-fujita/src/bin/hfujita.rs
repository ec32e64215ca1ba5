//! `hfujita`: kernel checks, single runs, phase-diagram sweeps, diagnostics and oracle suites.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure (including failed checks).

use clap::{Args, Parser, Subcommand};
use heisenberg_fujita::cli::{self, checks, RunConfig};
use heisenberg_fujita::diagnostics::report_csv;
use heisenberg_fujita::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hfujita", version, about = "Fujita-type blow-up experiments on the Heisenberg group")]
struct Cli {
    /// Root under which each invocation creates `<timestamp>-<hash>/`.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel mass, scaling identity, Gaussian sandwich and heat-equation residual.
    KernelCheck {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// One (p, γ) cell.
    Run(RunArgs),
    /// A (p, γ) grid; writes sweep.csv, phase.dat and a manifest.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',', required = true)]
        p_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        gamma_values: Vec<f64>,
    },
    /// Decay fits, blow-up functionals and the critical mass probe; writes diagnostics.csv.
    Diagnose,
    /// Rearrangement matrix and randomized reverse Hölder trials.
    Oracle {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Configuration sources, applied in order: file, named flags, `--set`.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// bump | profile_Q_decay | product_hardy | custom_file
    #[arg(long)]
    initial_data: Option<String>,
    #[arg(long)]
    custom_file: Option<String>,
    /// A positive number or `auto`.
    #[arg(long)]
    lambda_scale: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    t_horizon: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    n_xy: Option<String>,
    #[arg(long)]
    n_tau: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Any other key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let named = [
            ("gamma", &self.gamma),
            ("p", &self.p),
            ("initial_data", &self.initial_data),
            ("custom_file", &self.custom_file),
            ("lambda_scale", &self.lambda_scale),
            ("q", &self.q),
            ("amplitude", &self.amplitude),
            ("t_horizon", &self.t_horizon),
            ("dt", &self.dt),
            ("n_xy", &self.n_xy),
            ("n_tau", &self.n_tau),
            ("seed", &self.seed),
            ("workers", &self.workers),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_report(out: &Path, name: &str, hash_input: &str, body: &str) -> Result<PathBuf> {
    let dir = cli::create_run_dir(out, &cli::hash_text(hash_input))?;
    std::fs::write(dir.join(name), body)?;
    Ok(dir)
}

fn checked(passed: bool, what: &str) -> Result<()> {
    if passed {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what} failed")))
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KernelCheck { samples, seed } => {
            let (report, passed) = checks::kernel_check_report(samples, seed)?;
            print!("{report}");
            let dir = write_report(&cli.out, "kernel_check.txt", &format!("kernel-check {samples} {seed}"), &report)?;
            println!("report: {}", dir.display());
            checked(passed, "kernel check")
        }
        Command::Run(args) => {
            let cfg = args.config()?;
            let run = cli::run_single(&cfg)?;
            let dir = cli::write_run(&cli.out, &cfg, &run)?;
            let c = &run.cell;
            println!(
                "p={} gamma={} verdict={} t_final={} max_norm={:e} data={}",
                c.p,
                c.gamma,
                c.verdict.as_str(),
                c.t_final,
                c.norms.max,
                c.data
            );
            println!("run directory: {}", dir.display());
            Ok(())
        }
        Command::Sweep { run, p_values, gamma_values } => {
            let base = run.config()?;
            let cells = cli::run_sweep(&p_values, &gamma_values, &base)?;
            print!("{}", cli::sweep_csv(&cells, base.q_dim()));
            let dir = cli::write_sweep(&cli.out, &base, &p_values, &gamma_values, &cells)?;
            for (gamma, lo, hi) in cli::sweep_inversions(&cells) {
                eprintln!("warning: γ = {gamma}: global_certified at p = {lo} below blowup at p = {hi}");
            }
            println!("run directory: {}", dir.display());
            Ok(())
        }
        Command::Diagnose => {
            let rows = checks::diagnostic_rows()?;
            let csv = report_csv(&rows);
            print!("{csv}");
            let dir = write_report(&cli.out, "diagnostics.csv", "diagnose", &csv)?;
            println!("report: {}", dir.display());
            let failed = rows.iter().any(|r| r.verdict == heisenberg_fujita::diagnostics::RowVerdict::Fail);
            checked(!failed, "diagnostics")
        }
        Command::Oracle { trials, seed } => {
            let (report, passed) = checks::oracle_report(trials, seed)?;
            print!("{report}");
            let dir = write_report(&cli.out, "oracle.txt", &format!("oracle {trials} {seed}"), &report)?;
            println!("report: {}", dir.display());
            checked(passed, "oracle suite")
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

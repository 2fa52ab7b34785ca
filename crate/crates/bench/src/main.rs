//! `dpsco-bench`: sweeps, rate fits, privacy audits and oracle suites.
//!
//! Exit codes: 0 success, 1 suite failure or runtime error, 2 config error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dpsco::hardness::OracleReport;
use dpsco::interpolation::sample_complexity;
use dpsco::PrivacyBudget;
use dpsco_bench::suites::{run_audit, run_oracles, write_reports};
use dpsco_bench::sweep::read_csv;
use dpsco_bench::{fit_rate, run_sweep, write_csv, BenchError, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "dpsco-bench", about = "Private convex optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed_base: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    parallel: Option<usize>,
    /// Per-key override, repeatable: --set seeds=5.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded sweep and write CSV rows.
    Sweep(Common),
    /// Fit exponential and polynomial rates to a sweep CSV.
    Fit {
        /// CSV written by `sweep`.
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical ε audit of a calibrated mechanism and a half-noise control.
    Audit {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Stability, growth, pinch and interpolation-certificate oracles.
    Oracles(Common),
    /// Sample-size calculator `α^{−ρ} + (d/(ρε))·ln(1/α)`.
    Complexity {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    if let Some(seed) = common.seed_base {
        cfg.seed_base = seed;
    }
    if let Some(p) = common.parallel {
        cfg.parallel = p;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    for pair in &common.overrides {
        cfg.set_pair(pair)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn finish_suite(reports: &[OracleReport], cfg: &ExperimentConfig) -> Result<bool> {
    write_reports(reports, output(cfg.out.as_deref())?)?;
    for r in reports.iter().filter(|r| !r.passed) {
        eprintln!("FAIL {}: measured {} (lower {:?}, upper {:?}) {}", r.name, r.measured, r.lower, r.upper, r.detail);
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep(common) => {
            let cfg = load_config(&common)?;
            let rows = run_sweep(&cfg)?;
            write_csv(&rows, output(cfg.out.as_deref())?)?;
            Ok(true)
        }
        Command::Fit { input, common } => {
            let cfg = load_config(&common)?;
            let rows = read_csv(File::open(&input)?)?;
            let (exp, poly) = fit_rate(&rows)?;
            let mut out = output(cfg.out.as_deref())?;
            writeln!(out, "model,slope,intercept,r_squared")?;
            for f in [exp, poly] {
                writeln!(out, "{},{},{},{}", f.model, f.slope, f.intercept, f.r_squared)?;
            }
            Ok(true)
        }
        Command::Audit { trials, common } => {
            let cfg = load_config(&common)?;
            finish_suite(&run_audit(cfg.epsilon, trials, cfg.seed_base)?, &cfg)
        }
        Command::Oracles(common) => {
            let cfg = load_config(&common)?;
            finish_suite(&run_oracles(cfg.seed_base)?, &cfg)
        }
        Command::Complexity { alpha, rho, common } => {
            let cfg = load_config(&common)?;
            let budget = PrivacyBudget::new(cfg.epsilon, cfg.delta)?;
            let n = sample_complexity(alpha, rho, cfg.dim, &budget).map_err(|e| BenchError::Config(e.to_string()))?;
            let mut out = output(cfg.out.as_deref())?;
            writeln!(out, "alpha={alpha} rho={rho} d={} eps={} delta={} samples={n}", cfg.dim, cfg.epsilon, cfg.delta)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

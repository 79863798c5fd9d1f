use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ewspec_cli::config::load_config;
use ewspec_cli::output::{sidecar, to_value, OUT_ENV};
use ewspec_cli::{figures, scenario, validate};

/// Time-dependent physical spectra of (deformed) Jaynes-Cummings and Rabi models.
#[derive(Parser)]
#[command(name = "ewspec", version)]
struct Cli {
    /// Output directory; overrides the config's [output] dir.
    #[arg(long, global = true, env = OUT_ENV)]
    out: Option<PathBuf>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum dataset from a scenario config (TOML, or a JSON sidecar).
    Spectrum { config: PathBuf },
    /// Lowest eigenvalues over a coupling sweep.
    Eigensweep { config: PathBuf },
    /// Two-time correlation G(t1, t2) on a square grid.
    Correlation { config: PathBuf },
    /// Frozen figure datasets: fig1a..fig1d, fig2a..fig2c, fig3..fig7, or all.
    Figure { id: String },
    /// Runs the acceptance battery; the exit status is nonzero if any criterion fails.
    Validate,
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let out = cli.out.as_deref();
    let fixed_out = || out.map_or_else(|| PathBuf::from("out"), Path::to_path_buf);
    match &cli.command {
        Command::Spectrum { config } => {
            let cfg = load_config(config)?;
            println!("{}", scenario::run_spectrum(&cfg, out)?.display());
        }
        Command::Eigensweep { config } => {
            let cfg = load_config(config)?;
            println!("{}", scenario::run_eigensweep(&cfg, out)?.display());
        }
        Command::Correlation { config } => {
            let cfg = load_config(config)?;
            println!("{}", scenario::run_correlation(&cfg, out)?.display());
        }
        Command::Figure { id } => {
            for path in figures::reproduce(id, &fixed_out())? {
                println!("{}", path.display());
            }
        }
        Command::Validate => {
            let mut reports = Vec::new();
            for criterion in [
                validate::criterion1 as fn() -> validate::CriterionReport,
                validate::criterion2,
                validate::criterion3,
                validate::criterion4,
                validate::criterion5,
                validate::criterion6,
                validate::criterion7,
                validate::criterion8,
                validate::criterion9,
                validate::criterion10,
            ] {
                let r = criterion();
                println!("{r}");
                reports.push(r);
            }
            let passed = reports.iter().all(|r| r.passed);
            let dir = fixed_out();
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("validation.json");
            let body = sidecar(serde_json::json!({ "passed": passed, "criteria": to_value(&reports) }));
            std::fs::write(&path, serde_json::to_string_pretty(&body)? + "\n")?;
            println!(
                "{} of {} criteria passed; report in {}",
                reports.iter().filter(|r| r.passed).count(),
                reports.len(),
                path.display()
            );
            return Ok(passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

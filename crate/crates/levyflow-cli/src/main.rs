//! Command-line front end for the levyflow library.
//!
//! Every run is reproducible from its inputs: the effective configuration
//! (defaults, then config file, then `--set` overrides, then `--seed`) is
//! written to the output directory in canonical form, its digest is
//! stamped into every report and the manifest, and all data files are
//! derived deterministically from (config, seed). Repeating a command
//! with the same inputs reproduces every artifact byte for byte; only the
//! wall-clock entry in the manifest varies.

mod config;
mod experiments;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::Config;
use output::OutDir;

#[derive(Parser)]
#[command(name = "levyflow", version, about = "fast-slow systems, stable drivers, Marcus solves")]
struct Cli {
    /// Flat key=value config file (`#` comments allowed)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Root seed for all random streams
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory for CSV data, reports, and the manifest
    #[arg(long, global = true, value_name = "DIR", default_value = "levyflow-out")]
    out: PathBuf,

    /// Override one config key (repeatable)
    #[arg(long, global = true, value_name = "KEY=VALUE", action = clap::ArgAction::Append)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the configured interval map and write the orbit
    MapOrbit,
    /// Sample the first-return chain and estimate its tail index
    Returns,
    /// Sample rescaled driver paths from the fast dynamics
    Driver,
    /// Run the coupled fast-slow system and write driver and slow paths
    Fastslow,
    /// Sample paths of the configured stable process
    Levy,
    /// Solve a differential equation against a configured driver
    Rde,
    /// Run a named validation suite and write its report
    Validate {
        /// Suite name; pass an unknown name to list the options
        suite: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::MapOrbit => "map-orbit",
            Command::Returns => "returns",
            Command::Driver => "driver",
            Command::Fastslow => "fastslow",
            Command::Levy => "levy",
            Command::Rde => "rde",
            Command::Validate { .. } => "validate",
        }
    }
}

fn build_config(cli: &Cli) -> Result<Config> {
    let mut cfg = Config::from_defaults();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        cfg.apply_file(&text, &path.display().to_string())?;
    }
    for pair in &cli.set {
        cfg.apply_set(pair)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = build_config(cli)?;
    let mut out = OutDir::create(cli.out.clone())?;
    let canonical = cfg.canonical();
    let rows = canonical.lines().count() as u64;
    out.write_text("effective-config.txt", &canonical, rows)?;

    let mut suite_passed = true;
    match &cli.command {
        Command::MapOrbit => experiments::map_orbit(&cfg, &mut out)?,
        Command::Returns => experiments::returns(&cfg, &mut out)?,
        Command::Driver => experiments::driver(&cfg, &mut out)?,
        Command::Fastslow => experiments::fastslow(&cfg, &mut out)?,
        Command::Levy => experiments::levy(&cfg, &mut out)?,
        Command::Rde => experiments::rde(&cfg, &mut out)?,
        Command::Validate { suite } => {
            let report = validate::run_suite(suite, &cfg, &mut out)?;
            let passed = report.pass.unwrap_or(true);
            let verdict = if passed { "pass" } else { "FAIL" };
            let checks = report.checks.len();
            out.write_report("report.json", &report)?;
            println!("{suite}: {verdict} ({checks} checks)");
            suite_passed = passed;
        }
    }
    out.finish(cli.command.name(), &cfg.digest())?;
    Ok(suite_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

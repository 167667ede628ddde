//! `zoll`: runs the geometry, geodesic, spectral, observability and wave
//! experiments from a TOML config and writes CSV/JSON artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{parse_damping, parse_pair, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "zoll", version, about = "Zoll surface experiments")]
struct Cli {
    /// TOML run configuration; defaults apply to missing sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding output.directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for all randomness, overriding wave.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Time cap of the geodesic control check, overriding geodesics.tcap.
    #[arg(long, global = true)]
    tcap: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate the profile and write the isothermal chart.
    Surface,
    /// Zoll closure and the control condition for geodesics.region.
    Geodesics,
    /// Cluster the separated spectrum up to spectral.n_max.
    Spectrum,
    /// Mass ratios, Agmon, Hermite and Husimi diagnostics of a stored spectrum.
    Observe,
    /// Damped wave evolution, decay fit and observability ensemble.
    Wave(WaveArgs),
    /// Aggregate previous outputs into report.json.
    Report,
}

#[derive(Debug, Args)]
struct WaveArgs {
    /// none | indicator_upper | half_neighborhood:DELTA,WIDTH |
    /// smooth_vanishing:POWER | constant:VALUE
    #[arg(long)]
    damping: Option<String>,
    /// Single-mode data N,K.
    #[arg(long)]
    mode: Option<String>,
    /// Decay fit window T0,T1.
    #[arg(long = "fit-window")]
    fit_window: Option<String>,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(out) = cli.out {
        cfg.output.directory = out;
    }
    if let Some(seed) = cli.seed {
        cfg.wave.seed = seed;
    }
    if let Some(tcap) = cli.tcap {
        cfg.geodesics.tcap = tcap;
    }
    if let Command::Wave(args) = &cli.command {
        if let Some(d) = &args.damping {
            cfg.wave.damping = parse_damping(d)?;
        }
        if let Some(m) = &args.mode {
            cfg.wave.mode = Some(parse_pair("--mode", m)?);
        }
        if let Some(w) = &args.fit_window {
            cfg.wave.fit_window = Some(parse_pair("--fit-window", w)?);
        }
    }
    cfg.check()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Surface => commands::surface(&cfg),
        Command::Geodesics => commands::geodesics(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Observe => commands::observe(&cfg),
        Command::Wave(_) => commands::wave(&cfg),
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

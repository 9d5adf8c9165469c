use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use hfsim::runner::{run_export, run_ghz_tomography, run_mermin, run_truth_table, ExperimentConfig, SEED_ENV};

#[derive(Parser)]
#[command(name = "hfsim", version, about = "Polarization/OAM Fredkin gate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Truth table, conditional sub-tables and conversion rate.
    TruthTable,
    /// GHZ state tomography and fidelity.
    Tomography,
    /// Mermin correlations and S_M.
    Mermin,
    /// Write the bench description and its composed operator.
    Export,
}

#[derive(Args)]
struct Overrides {
    /// JSON config file; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bench JSON file, or "reference".
    #[arg(long, global = true)]
    bench: Option<String>,
    #[arg(long, global = true)]
    noise_p: Option<f64>,
    #[arg(long, global = true)]
    noise_sigma: Option<f64>,
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Takes precedence over HFSIM_SEED, which takes precedence over the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exact probabilities, no sampling.
    #[arg(long, global = true)]
    analytic: bool,
    #[arg(long, global = true)]
    resamples: Option<usize>,
    /// GHZ label: GHZ1, GHZ2, or three bits such as 101.
    #[arg(long, global = true)]
    label: Option<String>,
}

fn resolve(o: Overrides) -> anyhow::Result<ExperimentConfig> {
    let mut c = match &o.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading config {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    c.apply_seed_env(std::env::var(SEED_ENV).ok().as_deref())?;
    if let Some(v) = o.bench {
        c.bench = v;
    }
    if let Some(v) = o.noise_p {
        c.noise_p = v;
    }
    if let Some(v) = o.noise_sigma {
        c.noise_sigma = v;
    }
    if let Some(v) = o.shots {
        c.shots = v;
    }
    if let Some(v) = o.seed {
        c.seed = v;
    }
    if let Some(v) = o.out {
        c.out = v;
    }
    if o.analytic {
        c.analytic = true;
    }
    if let Some(v) = o.resamples {
        c.resamples = v;
    }
    if let Some(v) = o.label {
        c.label = v;
    }
    Ok(c)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = resolve(cli.overrides)?;
    let written = match cli.command {
        Command::TruthTable => run_truth_table(&config),
        Command::Tomography => run_ghz_tomography(&config),
        Command::Mermin => run_mermin(&config),
        Command::Export => run_export(&config),
    }?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
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

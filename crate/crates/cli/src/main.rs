use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use panelqr::{Algorithm, Result};
use panelqr_cli::commands::{self, EffectsArgs, FitArgs, SimulateArgs, Transform};
use panelqr_cli::config::ConfigDoc;
use panelqr_cli::exit_code;

#[derive(Parser)]
#[command(name = "panelqr", version, about = "Bayesian quantile regression for binary panel data")]
struct Cli {
    /// JSON configuration document with flat dotted keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set prior.c1=12`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Seed; takes precedence over the config and PANELQR_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Blocked,
    Nonblocked,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Blocked => Algorithm::Blocked,
            AlgorithmArg::Nonblocked => Algorithm::NonBlocked,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic panel (data.csv) and its true parameters (truth.json).
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quantile: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run one chain per quantile; writes draws_<p>.csv and meta_<p>.json.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "quantile")]
        quantiles: Vec<f64>,
        #[arg(long, value_enum)]
        algorithm: Option<AlgorithmArg>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
        /// Do not store the random-effect draws (effects need them).
        #[arg(long)]
        no_store_alpha: bool,
        /// Comma-separated covariates entering the individual means.
        #[arg(long, value_delimiter = ',')]
        mundlak: Option<Vec<String>>,
        /// Subtract the pooled mean of a covariate before fitting.
        #[arg(long)]
        demean: Vec<String>,
        /// Divide a covariate by a factor before fitting, as `column:factor`.
        #[arg(long)]
        scale: Vec<String>,
    },
    /// Summarize a draws file into summary.csv and summary.json.
    Diagnose {
        #[arg(long)]
        draws: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Average marginal effect, relative risk and odds ratio of a contrast.
    Effects {
        #[arg(long)]
        data: PathBuf,
        /// One or more draws files; one output block per quantile.
        #[arg(long, required = true)]
        draws: Vec<PathBuf>,
        #[arg(long)]
        covariate: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        out: PathBuf,
        /// Average over this many randomly chosen individuals.
        #[arg(long)]
        subsample: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut doc = ConfigDoc::load(cli.config.as_deref())?;
    doc.apply_overrides(&cli.overrides)?;
    match cli.command {
        Command::Simulate { out, quantile, n } => {
            let truth = commands::simulate(&doc, &SimulateArgs { out, quantile, n, seed: cli.seed })?;
            eprintln!("simulated {} observations ({} ones)", truth.observations, truth.ones);
        }
        Command::Fit {
            data,
            out,
            quantiles,
            algorithm,
            iterations,
            burn_in,
            thin,
            no_store_alpha,
            mundlak,
            demean,
            scale,
        } => {
            let mut transforms: Vec<Transform> =
                demean.into_iter().map(|column| Transform::Demean { column, mean: None }).collect();
            for s in &scale {
                transforms.push(Transform::parse_scale(s)?);
            }
            let args = FitArgs {
                data,
                out,
                quantiles,
                algorithm: algorithm.map(Into::into),
                iterations,
                burn_in,
                thin,
                seed: cli.seed,
                no_store_alpha,
                mundlak,
                transforms,
            };
            for m in commands::fit(&mut doc, &args)? {
                eprintln!("p = {}: {} draws in {:.1}s", m.quantile, m.kept, m.wall_time_secs);
            }
        }
        Command::Diagnose { draws, out } => {
            let rows = commands::diagnose(&draws, &out)?;
            eprintln!("summarized {} parameters", rows.len());
        }
        Command::Effects { data, draws, covariate, from, to, out, subsample } => {
            commands::effects(&doc, &EffectsArgs { data, draws, covariate, from, to, out, subsample, seed: cli.seed })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

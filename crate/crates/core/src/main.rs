use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fragsim::cli::dispatch;
use fragsim::config::{load_config, Experiment, PropagatorKind, RunConfig};

/// Anti-blockade fragmentation simulator for driven Rydberg chains.
#[derive(Parser)]
#[command(name = "fragsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every configuration into its sector (CSV).
    Sectors(Opts),
    /// Time-evolve one initial configuration (CSV).
    Evolve(Opts),
    /// Peak Rydberg density over a Δ–V grid (CSV).
    Scan(Opts),
    /// Peak Rydberg density along Δ at fixed V (CSV).
    Sweep(Opts),
    /// Oscillation periods of k-run resonances and their power-law fit.
    Periods(Opts),
    /// Refit a periods CSV given with --in (JSON).
    Fit(Opts),
    /// Control-atom suppression of a sub-sector (CSV + JSON report).
    Secondary(Opts),
    /// Resonant transition graph and its components (JSON).
    Graph(Opts),
}

#[derive(Args)]
struct Opts {
    /// TOML or JSON config; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Worker threads (default: FRAGSIM_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long = "n")]
    n_sites: Option<usize>,
    #[arg(long)]
    rabi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    v_control: Option<f64>,
    #[arg(long)]
    control_excited: Option<bool>,

    #[arg(long, allow_hyphen_values = true)]
    delta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta_max: Option<f64>,
    #[arg(long)]
    delta_step: Option<f64>,
    #[arg(long)]
    v_min: Option<f64>,
    #[arg(long)]
    v_max: Option<f64>,
    #[arg(long)]
    v_step: Option<f64>,
    /// Evolution horizon in Rabi cycles.
    #[arg(long)]
    horizon: Option<f64>,
    /// Sampling step in Rabi cycles.
    #[arg(long)]
    sample_step: Option<f64>,

    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Initial configuration, site 1 first (e.g. 00000).
    #[arg(long)]
    initial: Option<String>,
    /// Configuration to track individually; repeatable.
    #[arg(long)]
    track: Vec<String>,
    #[arg(long)]
    resonant_only: Option<bool>,
    /// Measure periods at the bare resonance instead of the shifted one.
    #[arg(long)]
    no_refine: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Method {
    Exact,
    Stepped,
}

impl Opts {
    fn into_config(self) -> (Option<PathBuf>, RunConfig) {
        let overrides = RunConfig {
            experiment: None,
            n_sites: self.n_sites,
            rabi: self.rabi,
            delta: self.delta,
            v: self.v,
            v_control: self.v_control,
            control_excited: self.control_excited,
            delta_min: self.delta_min,
            delta_max: self.delta_max,
            delta_step: self.delta_step,
            v_min: self.v_min,
            v_max: self.v_max,
            v_step: self.v_step,
            horizon: self.horizon,
            sample_step: self.sample_step,
            k: self.k,
            method: self.method.map(|m| match m {
                Method::Exact => PropagatorKind::Exact,
                Method::Stepped => PropagatorKind::Stepped,
            }),
            initial: self.initial,
            track: self.track,
            resonant_only: self.resonant_only,
            refine_resonance: self.no_refine.then_some(false),
            input: self.input,
            out: self.out,
            threads: self.threads,
        };
        (self.config, overrides)
    }
}

fn run(cli: Cli) -> fragsim::Result<String> {
    let (experiment, opts) = match cli.command {
        Command::Sectors(o) => (Experiment::Sectors, o),
        Command::Evolve(o) => (Experiment::Evolve, o),
        Command::Scan(o) => (Experiment::Scan, o),
        Command::Sweep(o) => (Experiment::Sweep, o),
        Command::Periods(o) => (Experiment::Periods, o),
        Command::Fit(o) => (Experiment::Fit, o),
        Command::Secondary(o) => (Experiment::Secondary, o),
        Command::Graph(o) => (Experiment::Graph, o),
    };
    let (path, overrides) = opts.into_config();
    let mut config = match path {
        Some(p) => load_config(&p)?,
        None => RunConfig::default(),
    };
    if let Some(e) = config.experiment {
        if e != experiment {
            eprintln!(
                "note: config file is for `{}`, running `{}`",
                e.name(),
                experiment.name()
            );
        }
    }
    config.merge(overrides);
    dispatch(experiment, &config)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! Command-line front end: reads an experiment config, applies flag
//! overrides, runs the experiment on a worker pool of the requested size and
//! writes CSV and JSONL results.

pub mod config;
pub mod output;

mod commands;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use twostage::params::Maturation;
use twostage::Direction;

pub use config::{CommandKind, ExperimentConfig};

pub const OUT_ENV: &str = "TWOSTAGE_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "twostage",
    version,
    about = "Simulate the two-stage contact process and its dual"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML experiment file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", env = OUT_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// A rate, or `inf` for the contact process.
    #[arg(long, global = true)]
    pub gamma: Option<Maturation>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Lattice half-extent L.
    #[arg(long, global = true)]
    pub half_extent: Option<usize>,
    /// Run the dual instead of the forward process.
    #[arg(long, global = true)]
    pub dual: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// One trajectory, dumped as JSONL.
    Simulate {
        #[arg(long, value_enum)]
        engine: Option<config::SimulateEngine>,
    },
    /// Survival probability from a single site (or the configured start).
    Survival,
    /// Bracket the critical transmission rate for each gamma.
    Critical,
    /// Right or left edge speed from a half-line.
    EdgeSpeed,
    /// Upper invariant density at the origin.
    Density,
    /// Survival and density over a (lambda, gamma) grid.
    PhaseDiagram,
    /// Randomized duality checks on small graphs.
    DualityTest {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Offspring series and maturation statistics.
    Offspring,
}

impl Command {
    pub fn kind(self) -> CommandKind {
        match self {
            Command::Simulate { .. } => CommandKind::Simulate,
            Command::Survival => CommandKind::Survival,
            Command::Critical => CommandKind::Critical,
            Command::EdgeSpeed => CommandKind::EdgeSpeed,
            Command::Density => CommandKind::Density,
            Command::PhaseDiagram => CommandKind::PhaseDiagram,
            Command::DualityTest { .. } => CommandKind::DualityTest,
            Command::Offspring => CommandKind::Offspring,
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: CommandKind,
    pub files: Vec<PathBuf>,
    /// Human-readable summary, printed to stdout.
    pub summary: String,
    /// `false` for a contract failure such as a duality violation.
    pub success: bool,
}

/// Load the config file (if any) and apply the flags on top of it.
pub fn resolve(cli: &Cli) -> Result<(CommandKind, ExperimentConfig)> {
    let o = &cli.overrides;
    let mut config = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let command = match (cli.command, config.command) {
        (Some(c), _) => c.kind(),
        (None, Some(k)) => k,
        (None, None) => bail!("no subcommand given and the config has no `command`"),
    };
    config.command = Some(command);
    if let Some(v) = o.seed {
        config.seed = v;
    }
    if o.workers.is_some() {
        config.workers = o.workers;
    }
    if let Some(v) = &o.out {
        config.out = v.clone();
    }
    if let Some(v) = o.lambda {
        config.params.lambda = v;
    }
    if let Some(v) = o.gamma {
        config.params.gamma = v;
    }
    if let Some(v) = o.delta {
        config.params.delta = v;
    }
    if let Some(v) = o.t_max {
        config.t_max = v;
    }
    if let Some(v) = o.replicates {
        config.replicates = v;
    }
    if let Some(v) = o.half_extent {
        config.lattice.half_extent = v;
    }
    if o.dual {
        config.direction = Direction::Dual;
    }
    match cli.command {
        Some(Command::Simulate { engine: Some(e) }) => config.simulate.engine = e,
        Some(Command::DualityTest { trials: Some(n) }) => config.duality_test.trials = n,
        _ => {}
    }
    // one threshold for bisection and phase bands
    config.bisection.theta = config.theta;
    Ok((command, config))
}

/// Validate and run one experiment on a pool of `config.workers` threads.
pub fn execute(command: CommandKind, config: &ExperimentConfig) -> Result<Outcome> {
    config.validate(command)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| commands::run(command, config))
}

/// Parse-free entry point used by `main` and by tests.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let (command, config) = resolve(cli)?;
    execute(command, &config)
}

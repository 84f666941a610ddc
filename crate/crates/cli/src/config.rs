//! Experiment configuration: one TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use twostage::estimators::{BisectionConfig, EdgeSide, InitialCondition, SurvivalSpec, DEFAULT_THETA};
use twostage::params::Maturation;
use twostage::{Boundary, Direction, FiniteGraph, LatticeSpec, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Simulate,
    Survival,
    Critical,
    EdgeSpeed,
    Density,
    PhaseDiagram,
    DualityTest,
    Offspring,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Simulate => "simulate",
            CommandKind::Survival => "survival",
            CommandKind::Critical => "critical",
            CommandKind::EdgeSpeed => "edge-speed",
            CommandKind::Density => "density",
            CommandKind::PhaseDiagram => "phase-diagram",
            CommandKind::DualityTest => "duality-test",
            CommandKind::Offspring => "offspring",
        }
    }

    /// Base name of the result files.
    pub fn stem(self) -> &'static str {
        match self {
            CommandKind::Simulate => "trajectory",
            CommandKind::Survival => "survival",
            CommandKind::Critical => "critical",
            CommandKind::EdgeSpeed => "edge_speed",
            CommandKind::Density => "density",
            CommandKind::PhaseDiagram => "phase_diagram",
            CommandKind::DualityTest => "duality_test",
            CommandKind::Offspring => "offspring",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SimulateEngine {
    /// Sample the event set and run through it.
    #[default]
    Graphical,
    /// Direct-method Markov chain.
    Ctmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub lambda: f64,
    pub gamma: Maturation,
    pub delta: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            lambda: 4.0,
            gamma: Maturation::Rate(4.0),
            delta: 0.0,
        }
    }
}

/// Parameter sweep. An empty list means "the value in `[params]`".
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<Maturation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub engine: SimulateEngine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualityTestConfig {
    pub trials: usize,
    pub max_sites: usize,
    pub horizon: f64,
}

impl Default for DualityTestConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            max_sites: 5,
            horizon: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeConfig {
    pub side: EdgeSide,
}

fn is_empty_path(p: &Path) -> bool {
    p.as_os_str().is_empty()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Used when no subcommand is given on the command line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "is_empty_path")]
    pub out: PathBuf,
    pub lattice: LatticeSpec,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub t_max: f64,
    pub replicates: usize,
    pub confidence: f64,
    pub theta: f64,
    pub direction: Direction,
    pub initial: InitialCondition,
    pub bisection: BisectionConfig,
    pub simulate: SimulateConfig,
    pub edge: EdgeConfig,
    pub duality_test: DualityTestConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 0,
            workers: None,
            out: PathBuf::from("results"),
            lattice: LatticeSpec::line(50),
            params: ParamsConfig::default(),
            grid: GridConfig::default(),
            t_max: 100.0,
            replicates: 1000,
            confidence: 0.95,
            theta: DEFAULT_THETA,
            direction: Direction::Forward,
            initial: InitialCondition::SingleSite,
            bisection: BisectionConfig::default(),
            simulate: SimulateConfig::default(),
            edge: EdgeConfig::default(),
            duality_test: DualityTestConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The part of the config that determines results: without the worker
    /// count and the output directory.
    pub fn result_defining(&self) -> Self {
        Self {
            workers: None,
            out: PathBuf::new(),
            ..self.clone()
        }
    }

    pub fn params(&self) -> Result<Params> {
        Ok(Params {
            lambda: self.params.lambda,
            gamma: self.params.gamma,
            delta: self.params.delta,
        }
        .validated()?)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        if self.grid.lambdas.is_empty() {
            vec![self.params.lambda]
        } else {
            self.grid.lambdas.clone()
        }
    }

    pub fn gammas(&self) -> Vec<Maturation> {
        if self.grid.gammas.is_empty() {
            vec![self.params.gamma]
        } else {
            self.grid.gammas.clone()
        }
    }

    /// Every `(lambda, gamma)` point of the sweep, gamma outermost.
    pub fn grid_params(&self) -> Result<Vec<Params>> {
        let mut out = Vec::new();
        for gamma in self.gammas() {
            for lambda in self.lambdas() {
                out.push(
                    Params {
                        lambda,
                        gamma,
                        delta: self.params.delta,
                    }
                    .validated()?,
                );
            }
        }
        Ok(out)
    }

    pub fn survival_spec(&self) -> SurvivalSpec {
        SurvivalSpec {
            lattice: self.lattice,
            initial: self.initial.clone(),
            t_max: self.t_max,
            replicates: self.replicates,
            direction: self.direction,
            confidence: self.confidence,
        }
    }

    /// Check everything the chosen command will use before any simulation.
    pub fn validate(&self, command: CommandKind) -> Result<()> {
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        self.params()?;
        self.grid_params()?;
        let sims = !matches!(command, CommandKind::DualityTest | CommandKind::Offspring);
        if sims {
            let graph = FiniteGraph::build_lattice(&self.lattice)?;
            self.initial.build(&graph)?;
        }
        let t_ok = if command == CommandKind::Simulate {
            self.t_max.is_finite() && self.t_max >= 0.0
        } else {
            self.t_max.is_finite() && self.t_max > 0.0
        };
        if !t_ok {
            bail!("t_max must be positive and finite, got {}", self.t_max);
        }
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            bail!("confidence must lie in (0, 1), got {}", self.confidence);
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            bail!("theta must lie in (0, 1), got {}", self.theta);
        }
        match command {
            CommandKind::EdgeSpeed if self.lattice.dimension != 1 => {
                bail!("edge-speed needs a one-dimensional lattice")
            }
            CommandKind::EdgeSpeed if self.lattice.boundary != Boundary::Box => {
                bail!("edge-speed runs on a box; set lattice.boundary = \"box\"")
            }
            CommandKind::DualityTest => {
                let d = &self.duality_test;
                if d.trials == 0 || d.max_sites == 0 || !(d.horizon.is_finite() && d.horizon > 0.0) {
                    bail!("duality_test needs trials, max_sites and horizon all positive");
                }
            }
            CommandKind::Critical => {
                let b = &self.bisection;
                if !(b.theta > 0.0 && b.theta < 1.0) || b.replicates == 0 || b.max_replicates < b.replicates {
                    bail!("bisection needs theta in (0, 1) and 0 < replicates <= max_replicates");
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = ExperimentConfig::default();
        c.grid.gammas = vec![Maturation::Rate(1.0), Maturation::Instant];
        c.workers = Some(3);
        c.initial = InitialCondition::Custom("0020".into());
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_sections() {
        let c = ExperimentConfig::from_toml(
            r#"
            seed = 7
            [params]
            lambda = 2.5
            gamma = "inf"
            [lattice]
            dimension = 2
            half_extent = 3
            range = 1
            boundary = "torus"
            [bisection]
            theta = 0.1
            "#,
        )
        .unwrap();
        assert_eq!(c.params.gamma, Maturation::Instant);
        assert_eq!(c.lattice.boundary, Boundary::Torus);
        assert_eq!(c.bisection.theta, 0.1);
        assert_eq!(c.bisection.replicates, BisectionConfig::default().replicates);
        assert!(c.validate(CommandKind::Survival).is_ok());
    }

    #[test]
    fn params_fields_default_individually() {
        let c = ExperimentConfig::from_toml("[params]\ndelta = 0.5").unwrap();
        assert_eq!(c.params.lambda, 4.0);
        assert_eq!(c.params.gamma, Maturation::Rate(4.0));
        assert_eq!(c.params.delta, 0.5);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("sed = 1").is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = ExperimentConfig::default();
        c.params.delta = -1.0;
        assert!(c.validate(CommandKind::Survival).is_err());
        let mut c = ExperimentConfig::default();
        c.replicates = 0;
        assert!(c.validate(CommandKind::Density).is_err());
        let mut c = ExperimentConfig::default();
        c.t_max = 0.0;
        assert!(c.validate(CommandKind::Survival).is_err());
        assert!(c.validate(CommandKind::Simulate).is_ok());
        let mut c = ExperimentConfig::default();
        c.lattice.boundary = Boundary::Torus;
        assert!(c.validate(CommandKind::EdgeSpeed).is_err());
    }
}

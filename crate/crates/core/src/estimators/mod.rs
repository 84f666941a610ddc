//! Monte Carlo estimators built on the active-set engine.
//!
//! All of them are deterministic functions of their inputs and a master seed:
//! replicate `i` of an estimate keyed by tag `k` always draws from stream `i`
//! of the seed `derive_seed(master, [k, ...])`.
//!
//! Finite-size conventions: "survives" means "some site is active at `t_max`"
//! on the finite graph. A finite horizon biases survival up, free box edges
//! bias it down.

mod branching;
mod density;
mod edge;
mod survival;

pub use branching::{
    branching_offspring_bound_check, gamma_lower_bound, maturation_probability_mc, offspring_expectation_mc,
    BranchingCheck, OffspringSample,
};
pub use density::{
    complete_convergence_check, duality_density_check, upper_density, ConvergenceReport, DensityEstimate,
    DualityDensityReport,
};
pub use edge::{cluster_width, edge_speed, ClusterRecord, ClusterSummary, EdgeSide, EdgeSpeed, EdgeSpeedSpec};
pub use survival::{
    critical_lambda, phase_diagram, survival_probability, BisectionConfig, CriticalBracket, PhasePoint, PhaseSpec,
    Probe, ProbeClass,
};

use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::engine::ActiveSetEngine;
use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, LatticeSpec};
use crate::params::{Direction, Params};
use crate::replicates::map_replicates_with;
use crate::rng::{replicate_rng, SimRng};

/// Default survival-probability threshold separating "dies out" from
/// "survives" in bisection and phase diagrams.
pub const DEFAULT_THETA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", content = "config")]
pub enum InitialCondition {
    /// A single mature site at the origin.
    #[default]
    SingleSite,
    /// Mature on every site with first coordinate `<= 0` (one dimension).
    HalfLine,
    AllMature,
    /// Explicit configuration in digit form, e.g. `"00200"`.
    Custom(String),
}

impl InitialCondition {
    pub fn build(&self, graph: &FiniteGraph) -> Result<Configuration> {
        match self {
            InitialCondition::SingleSite => Configuration::single_site(graph, origin(graph)),
            InitialCondition::HalfLine => Configuration::mature_on(graph, &graph.half_line_sites()?),
            InitialCondition::AllMature => Ok(Configuration::all_mature(graph)),
            InitialCondition::Custom(text) => {
                let c: Configuration = text.parse()?;
                if c.len() != graph.site_count() {
                    return Err(Error::LengthMismatch(c.len(), graph.site_count()));
                }
                Ok(c)
            }
        }
    }
}

fn default_confidence() -> f64 {
    0.95
}

/// What to run for a survival-type estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSpec {
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub initial: InitialCondition,
    pub t_max: f64,
    pub replicates: usize,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

impl SurvivalSpec {
    pub fn new(lattice: LatticeSpec, t_max: f64, replicates: usize) -> Self {
        Self {
            lattice,
            initial: InitialCondition::SingleSite,
            t_max,
            replicates,
            direction: Direction::Forward,
            confidence: default_confidence(),
        }
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::Param(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.replicates == 0 {
            return Err(Error::Param("replicates must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Param(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Origin of a lattice graph; site 0 otherwise.
pub fn origin(graph: &FiniteGraph) -> usize {
    graph.origin().unwrap_or(0)
}

/// Run replicates `range` with a fresh engine state per worker. `f` gets the
/// engine (not yet reset) and that replicate's generator.
pub(crate) fn run_replicates<T, F>(
    graph: &FiniteGraph,
    params: &Params,
    which: Direction,
    seed: u64,
    range: std::ops::Range<usize>,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ActiveSetEngine<'_>, &mut SimRng) -> T + Sync + Send,
{
    let template = ActiveSetEngine::new(graph, *params, which)?;
    let start = range.start;
    Ok(map_replicates_with(
        range.len(),
        || template.clone(),
        |engine, i| {
            let mut rng = replicate_rng(seed, (start + i) as u64);
            f(engine, &mut rng)
        },
    ))
}

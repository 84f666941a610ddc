//! Upper invariant density and the identities that tie it to survival.
//!
//! On a finite graph, duality with `zeta_0` a single dual 2 at `o` and
//! `xi_0` all 2's gives, for every `t`,
//!
//! `P(xi^1_t(o) != 0) = P(zeta^o_t is not empty)`,
//!
//! and the same with the roles of the two processes exchanged. Both sides are
//! estimated independently here on the same graph.

use serde::{Deserialize, Serialize};

use super::{origin, run_replicates, InitialCondition, SurvivalSpec};
use crate::configuration::{Configuration, SiteState};
use crate::error::Result;
use crate::graph::FiniteGraph;
use crate::params::{Direction, Params};
use crate::rng::{derive_seed, tag};
use crate::stats::Estimate;

use super::survival::survival_probability;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    /// `P(origin active at t_max)` from all sites in state 2.
    pub active: Estimate,
    /// `P(origin in state 2 at t_max)`.
    pub mature: Estimate,
}

/// Density at the origin at `t_max` starting from every site in state 2.
/// `spec.initial` is ignored; `spec.direction` picks the process.
pub fn upper_density(params: &Params, spec: &SurvivalSpec, seed: u64) -> Result<DensityEstimate> {
    spec.validate()?;
    let graph = FiniteGraph::build_lattice(&spec.lattice)?;
    let o = origin(&graph);
    let init = Configuration::all_mature(&graph);
    let seed = derive_seed(seed, &[tag("density")]);
    let t_max = spec.t_max;
    let states = run_replicates(
        &graph,
        params,
        spec.direction,
        seed,
        0..spec.replicates,
        |engine, rng| {
            engine.reset(&init).expect("sized to graph");
            engine.run(t_max, rng, |_, _, _, _| {});
            engine.state()[o]
        },
    )?;
    let active = states.iter().filter(|s| s.is_active()).count();
    let mature = states.iter().filter(|&&s| s == SiteState::Mature).count();
    Ok(DensityEstimate {
        active: Estimate::proportion(active, spec.replicates, spec.confidence),
        mature: Estimate::proportion(mature, spec.replicates, spec.confidence),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityDensityReport {
    pub forward_density: Estimate,
    pub dual_survival: Estimate,
    /// `|forward_density - dual_survival| <= 3 sigma`.
    pub agree: bool,
    pub dual_density: Estimate,
    pub forward_survival: Estimate,
    pub exchanged_agree: bool,
}

/// Estimate both sides of the density/survival identity, in both directions.
pub fn duality_density_check(params: &Params, spec: &SurvivalSpec, seed: u64) -> Result<DualityDensityReport> {
    let density = |which| SurvivalSpec {
        direction: which,
        initial: InitialCondition::AllMature,
        ..spec.clone()
    };
    let survival = |which| SurvivalSpec {
        direction: which,
        initial: InitialCondition::SingleSite,
        ..spec.clone()
    };
    let forward_density = upper_density(params, &density(Direction::Forward), derive_seed(seed, &[1]))?.active;
    let dual_survival = survival_probability(&survival(Direction::Dual), params, derive_seed(seed, &[2]))?;
    let dual_density = upper_density(params, &density(Direction::Dual), derive_seed(seed, &[3]))?.active;
    let forward_survival = survival_probability(&survival(Direction::Forward), params, derive_seed(seed, &[4]))?;
    Ok(DualityDensityReport {
        agree: forward_density.agrees_with(&dual_survival, 3.0),
        exchanged_agree: dual_density.agrees_with(&forward_survival, 3.0),
        forward_density,
        dual_survival,
        dual_density,
        forward_survival,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `P(xi^o_t(o) != 0)`.
    pub p_hat: Estimate,
    /// `P(xi^o_t != empty)`.
    pub s_hat: Estimate,
    /// `P(xi^1_t(o) != 0)`.
    pub nu_hat: Estimate,
    /// `s_hat * nu_hat`.
    pub product: f64,
    /// Delta-method standard error of `p_hat - s_hat * nu_hat`, accounting
    /// for `p_hat` and `s_hat` coming from the same runs.
    pub combined_se: f64,
    pub passes: bool,
}

/// Compare the one-site density with survival times the upper density,
/// which is what the limit `alpha * delta_0 + (1 - alpha) * nu` predicts.
pub fn complete_convergence_check(params: &Params, spec: &SurvivalSpec, seed: u64) -> Result<ConvergenceReport> {
    spec.validate()?;
    let graph = FiniteGraph::build_lattice(&spec.lattice)?;
    let o = origin(&graph);
    let init = Configuration::single_site(&graph, o)?;
    let t_max = spec.t_max;
    let single_seed = derive_seed(seed, &[tag("convergence")]);
    let runs = run_replicates(
        &graph,
        params,
        spec.direction,
        single_seed,
        0..spec.replicates,
        |engine, rng| {
            engine.reset(&init).expect("sized to graph");
            let out = engine.run(t_max, rng, |_, _, _, _| {});
            (engine.state()[o].is_active(), out.extinct_at.is_none())
        },
    )?;
    let n = spec.replicates;
    let p_hat = Estimate::proportion(runs.iter().filter(|r| r.0).count(), n, spec.confidence);
    let s_hat = Estimate::proportion(runs.iter().filter(|r| r.1).count(), n, spec.confidence);
    let density_spec = SurvivalSpec {
        initial: InitialCondition::AllMature,
        ..spec.clone()
    };
    let nu_hat = upper_density(params, &density_spec, derive_seed(seed, &[tag("convergence-density")]))?.active;

    let (p, s, nu) = (p_hat.mean, s_hat.mean, nu_hat.mean);
    let nf = n as f64;
    // origin active implies alive, so Cov(p_hat, s_hat) = p (1 - s) / n
    let var = p * (1.0 - p) / nf + nu * nu * s * (1.0 - s) / nf - 2.0 * nu * p * (1.0 - s) / nf
        + s * s * nu_hat.std_error.powi(2);
    let se = var.max(0.0).sqrt();
    let product = s * nu;
    Ok(ConvergenceReport {
        p_hat,
        s_hat,
        nu_hat,
        product,
        combined_se: se,
        passes: (p - product).abs() <= 3.0 * se,
    })
}

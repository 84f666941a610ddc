//! WebAssembly bindings for the browser demo in `www/`.

use twostage::checks::duality_trials;
use twostage::estimators::{survival_probability, SurvivalSpec};
use twostage::{Configuration, EventSet, FiniteGraph, LatticeSpec, Maturation, Params};
use wasm_bindgen::prelude::*;

const MAX_RING: usize = 1000;

fn maturation(gamma: f64) -> Maturation {
    if gamma.is_infinite() {
        Maturation::Instant
    } else {
        Maturation::Rate(gamma)
    }
}

fn params(lambda: f64, gamma: f64, delta: f64) -> Result<Params, JsError> {
    Ok(Params {
        lambda,
        gamma: maturation(gamma),
        delta,
    }
    .validated()?)
}

/// Spacetime picture on a ring of `sites` sites: `rows` snapshots evenly
/// spaced on `[0, t_max]`, flattened row by row, one byte (0, 1 or 2) per
/// site. Forward runs start from all 2's; dual runs start from a single 2 in
/// the middle and use the dual clock. Both read the same event set for a
/// given seed.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn spacetime(
    sites: usize,
    lambda: f64,
    gamma: f64,
    delta: f64,
    t_max: f64,
    rows: usize,
    seed: u32,
    dual: bool,
) -> Result<Vec<u8>, JsError> {
    if !(3..=MAX_RING).contains(&sites) || rows < 2 {
        return Err(JsError::new("need 3..=1000 sites and at least 2 rows"));
    }
    let p = params(lambda, gamma, delta)?;
    let graph = FiniteGraph::cycle(sites);
    let set = EventSet::sample(&graph, &p, t_max, seed as u64)?;
    let (init, trajectory) = if dual {
        let init = Configuration::single_site(&graph, sites / 2)?;
        let tr = set.evolve_dual(&init, t_max)?;
        (init, tr)
    } else {
        let init = Configuration::all_mature(&graph);
        let tr = set.evolve_forward(&init, t_max)?;
        (init, tr)
    };
    let mut state: Vec<u8> = init.states().iter().map(|s| s.as_u8()).collect();
    let mut out = Vec::with_capacity(rows * sites);
    let mut changes = trajectory.changes.iter().peekable();
    for r in 0..rows {
        let t = t_max * r as f64 / (rows - 1) as f64;
        while let Some(c) = changes.next_if(|c| c.time <= t) {
            state[c.site] = c.to.as_u8();
        }
        out.extend_from_slice(&state);
    }
    Ok(out)
}

/// Survival probability of a single 2 at the origin of the box `[-L, L]`
/// for each `lambda`, as `[mean, lower, upper]` triples (95% Wilson).
#[wasm_bindgen]
pub fn survival_curve(
    lambdas: Vec<f64>,
    gamma: f64,
    delta: f64,
    half_extent: usize,
    t_max: f64,
    replicates: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    let spec = SurvivalSpec::new(LatticeSpec::line(half_extent), t_max, replicates);
    let mut out = Vec::with_capacity(3 * lambdas.len());
    for lambda in lambdas {
        let e = survival_probability(&spec, &params(lambda, gamma, delta)?, seed as u64)?;
        out.extend([e.mean, e.lower, e.upper]);
    }
    Ok(out)
}

/// Number of duality violations in `trials` random small-graph trials.
#[wasm_bindgen]
pub fn duality_check(trials: usize, seed: u32) -> usize {
    duality_trials(trials, 5, 2.0, seed as u64).violations
}

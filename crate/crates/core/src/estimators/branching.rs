//! Offspring counting behind the critical maturation-rate bound.
//!
//! A juvenile matures before dying with probability `gamma / (1 + gamma)`
//! (at `delta = 0`). Once mature it fills each vacant neighbor, and refills a
//! neighbor `N_X` more times, where `N` is a unit-rate Poisson process of
//! deaths at the neighbor and `X ~ Exp(1)` is its own lifetime. Since
//! `P(N_X = k) = 2^-(k+1)`, `E N_X = 1`, each neighbor receives at most 2
//! offspring on average and a juvenile has at most `2M / (1 + 1/gamma)`.
//! Below `gamma = 1/(2M - 1)` that is less than one: extinction.

use num_rational::Ratio;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::configuration::{Configuration, SiteState};
use crate::ctmc;
use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::params::{Direction, Maturation, Params};
use crate::replicates::map_replicates;
use crate::rng::{derive_seed, replicate_rng, tag};
use crate::stats::Estimate;

/// `1 / (2M - 1)`, exactly.
pub fn gamma_lower_bound(max_degree: usize) -> Result<Ratio<u64>> {
    if max_degree == 0 {
        return Err(Error::Param("max degree must be at least 1".into()));
    }
    Ok(Ratio::new(1, 2 * max_degree as u64 - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffspringSample {
    /// Mean of `N_X`.
    pub mean: Estimate,
    /// Fraction of samples with `N_X = 0`.
    pub zero_fraction: Estimate,
    /// `counts[k]` samples had `N_X = k`.
    pub counts: Vec<usize>,
}

/// Sample `N_X` directly: count unit-rate arrivals before an independent
/// `Exp(1)` deadline.
pub fn offspring_expectation_mc(replicates: usize, seed: u64, confidence: f64) -> Result<OffspringSample> {
    if replicates == 0 {
        return Err(Error::Param("replicates must be at least 1".into()));
    }
    let seed = derive_seed(seed, &[tag("offspring")]);
    let draws = map_replicates(replicates, |i| {
        let mut rng = replicate_rng(seed, i as u64);
        let deadline: f64 = rng.sample(Exp1);
        let mut clock: f64 = rng.sample(Exp1);
        let mut k = 0usize;
        while clock <= deadline {
            k += 1;
            clock += rng.sample::<f64, _>(Exp1);
        }
        k
    });
    let max = draws.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0; max + 1];
    for &k in &draws {
        counts[k] += 1;
    }
    let samples: Vec<f64> = draws.iter().map(|&k| k as f64).collect();
    Ok(OffspringSample {
        mean: Estimate::from_samples(&samples, confidence),
        zero_fraction: Estimate::proportion(counts[0], replicates, confidence),
        counts,
    })
}

/// Fraction of isolated juveniles that mature before dying, by stepping the
/// chain on a single site once. Tends to `gamma / (1 + gamma + delta)`.
pub fn maturation_probability_mc(params: &Params, trials: usize, seed: u64, confidence: f64) -> Result<Estimate> {
    let params = params.validated()?;
    if trials == 0 {
        return Err(Error::Param("trials must be at least 1".into()));
    }
    if params.contact_mode() {
        return Err(Error::Param("maturation is instantaneous in contact mode".into()));
    }
    let graph = FiniteGraph::path(1);
    let juvenile = Configuration::uniform(1, SiteState::Juvenile);
    let seed = derive_seed(seed, &[tag("maturation")]);
    let steps = map_replicates(trials, |i| {
        ctmc::step(
            &graph,
            &params,
            &juvenile,
            Direction::Forward,
            &mut replicate_rng(seed, i as u64),
        )
        .map(|(_, next)| next.get(0) == SiteState::Mature)
    });
    let mut matured = 0;
    for s in steps {
        matured += s? as usize;
    }
    Ok(Estimate::proportion(matured, trials, confidence))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingCheck {
    /// Births sent out by the initial juvenile over its lifetime.
    pub offspring: Estimate,
    /// Fraction of replicates in which it matured.
    pub matured: Estimate,
    /// `2M / (1 + 1/gamma)`.
    pub bound: f64,
    /// `offspring.mean <= bound + 3 * offspring.std_error`.
    pub within_bound: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Leaf {
    Vacant,
    Juvenile,
    Mature,
}

/// One lifetime of a juvenile at the center of a star with `leaves` leaves.
/// Births count only while that individual is alive; leaf births back into
/// the (occupied) center never take effect.
fn star_lifetime<R: Rng + ?Sized>(params: &Params, leaves: usize, rng: &mut R) -> (usize, bool) {
    let contact = params.contact_mode();
    let gamma = params.gamma_rate();
    let mut center_mature = contact;
    let mut matured = contact;
    let mut state = vec![Leaf::Vacant; leaves];
    let mut births = 0;
    let birth_state = if contact { Leaf::Mature } else { Leaf::Juvenile };
    loop {
        let vacant = state.iter().filter(|&&s| s == Leaf::Vacant).count();
        let center_death = if center_mature { 1.0 } else { 1.0 + params.delta };
        let center_maturation = if center_mature { 0.0 } else { gamma };
        let center_births = if center_mature {
            params.lambda * vacant as f64
        } else {
            0.0
        };
        let leaf_rate = |s: Leaf| match s {
            Leaf::Vacant => 0.0,
            Leaf::Juvenile => 1.0 + params.delta + gamma,
            Leaf::Mature => 1.0,
        };
        let leaf_total: f64 = state.iter().map(|&s| leaf_rate(s)).sum();
        let total = center_death + center_maturation + center_births + leaf_total;
        // holding times do not matter here, only the jump chain
        let mut u = rng.random::<f64>() * total;
        if u < center_death {
            return (births, matured);
        }
        u -= center_death;
        if u < center_maturation {
            center_mature = true;
            matured = true;
            continue;
        }
        u -= center_maturation;
        if u < center_births {
            let pick = rng.random_range(0..vacant);
            let leaf = state
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == Leaf::Vacant)
                .nth(pick)
                .map(|(i, _)| i)
                .expect("vacant leaf");
            state[leaf] = birth_state;
            births += 1;
            continue;
        }
        u -= center_births;
        for s in state.iter_mut() {
            let r = leaf_rate(*s);
            if u < r {
                *s = match *s {
                    Leaf::Juvenile if u >= 1.0 + params.delta => Leaf::Mature,
                    _ => Leaf::Vacant,
                };
                break;
            }
            u -= r;
        }
    }
}

/// Mean number of births sent out by an initial juvenile at the center of a
/// star of degree `max_degree`, compared against `2M / (1 + 1/gamma)`.
pub fn branching_offspring_bound_check(
    params: &Params,
    max_degree: usize,
    replicates: usize,
    seed: u64,
) -> Result<BranchingCheck> {
    let params = params.validated()?;
    if replicates == 0 || max_degree == 0 {
        return Err(Error::Param("replicates and max degree must be at least 1".into()));
    }
    let seed = derive_seed(seed, &[tag("branching")]);
    let runs = map_replicates(replicates, |i| {
        star_lifetime(&params, max_degree, &mut replicate_rng(seed, i as u64))
    });
    let samples: Vec<f64> = runs.iter().map(|&(b, _)| b as f64).collect();
    let offspring = Estimate::from_samples(&samples, 0.95);
    let matured = Estimate::proportion(runs.iter().filter(|&&(_, m)| m).count(), replicates, 0.95);
    let m = max_degree as f64;
    let bound = match params.gamma {
        Maturation::Rate(g) if g > 0.0 => 2.0 * m / (1.0 + 1.0 / g),
        Maturation::Rate(_) => 0.0,
        Maturation::Instant => 2.0 * m,
    };
    Ok(BranchingCheck {
        within_bound: offspring.mean <= bound + 3.0 * offspring.std_error,
        offspring,
        matured,
        bound,
    })
}

//! Randomized exactness checks on small graphs, and marginal-frequency
//! comparisons between the simulators. Shared by the test suites and the
//! command-line `duality-test`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::configuration::{Configuration, SiteState};
use crate::ctmc;
use crate::engine::ActiveSetEngine;
use crate::error::Result;
use crate::graph::FiniteGraph;
use crate::graphical::{EventSet, StreamRates, DEFAULT_EVENT_CAP};
use crate::params::{Direction, Params};
use crate::replicates::map_replicates;
use crate::rng::{derive_seed, replicate_rng, tag, SimRng};

/// Outcome of a batch of randomized trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    pub violations: usize,
    /// Description of the first failing trial, in trial order.
    pub first_violation: Option<String>,
}

impl TrialReport {
    fn collect(results: Vec<Option<String>>) -> Self {
        let trials = results.len();
        let violations = results.iter().filter(|r| r.is_some()).count();
        Self {
            trials,
            violations,
            first_violation: results.into_iter().flatten().next(),
        }
    }
}

/// One random instance: a graph of at most `max_sites` sites, parameters,
/// a horizon, two configurations and an event-set seed.
#[derive(Debug, Clone)]
pub struct TrialCase {
    pub graph: FiniteGraph,
    pub params: Params,
    pub horizon: f64,
    pub a: Configuration,
    pub b: Configuration,
    pub event_seed: u64,
}

fn random_graph(rng: &mut SimRng, max_sites: usize) -> FiniteGraph {
    let max_sites = max_sites.max(1);
    match rng.random_range(0..4) {
        0 => FiniteGraph::path(rng.random_range(1..=max_sites)),
        1 if max_sites >= 3 => FiniteGraph::cycle(rng.random_range(3..=max_sites)),
        2 if max_sites >= 2 => FiniteGraph::star(rng.random_range(1..max_sites)),
        _ => {
            let n = rng.random_range(1..=max_sites);
            let mut lists = vec![Vec::new(); n];
            for a in 0..n {
                for b in a + 1..n {
                    if rng.random_bool(0.5) {
                        lists[a].push(b);
                        lists[b].push(a);
                    }
                }
            }
            FiniteGraph::from_adjacency(&lists).expect("simple symmetric graph")
        }
    }
}

fn random_config(rng: &mut SimRng, n: usize) -> Configuration {
    Configuration::new((0..n).map(|_| SiteState::ALL[rng.random_range(0..3)]).collect())
}

impl TrialCase {
    /// `lambda, gamma` uniform on `[0, 5]`, `delta` on `[0, 2]`, one case in
    /// ten in contact mode.
    pub fn random(rng: &mut SimRng, max_sites: usize, horizon: f64) -> Self {
        let graph = random_graph(rng, max_sites);
        let lambda = rng.random_range(0.0..=5.0);
        let delta = rng.random_range(0.0..=2.0);
        let params = if rng.random_bool(0.1) {
            Params::contact(lambda, delta)
        } else {
            Params::new(lambda, rng.random_range(0.0..=5.0), delta)
        }
        .expect("parameters in range");
        let n = graph.site_count();
        Self {
            a: random_config(rng, n),
            b: random_config(rng, n),
            params,
            horizon,
            event_seed: rng.random(),
            graph,
        }
    }

    fn events(&self) -> Result<EventSet> {
        EventSet::sample(&self.graph, &self.params, self.horizon, self.event_seed)
    }
}

fn run_trials<F>(trials: usize, seed: u64, label: &str, max_sites: usize, horizon: f64, check: F) -> TrialReport
where
    F: Fn(&TrialCase, &mut SimRng) -> Result<bool> + Sync + Send,
{
    let seed = derive_seed(seed, &[tag(label)]);
    let results = map_replicates(trials, |i| {
        let mut rng = replicate_rng(seed, i as u64);
        let case = TrialCase::random(&mut rng, max_sites, horizon);
        match check(&case, &mut rng) {
            Ok(true) => None,
            Ok(false) => Some(format!("trial {i}: {case:?}")),
            Err(e) => Some(format!("trial {i}: {e}")),
        }
    });
    TrialReport::collect(results)
}

/// `compatible(xi_t, zeta_0) == compatible(xi_0, zeta_t)` at `t = horizon`
/// and at a uniform time in `[0, horizon]`, with both processes driven by one
/// event set.
pub fn duality_trials(trials: usize, max_sites: usize, horizon: f64, seed: u64) -> TrialReport {
    run_trials(trials, seed, "duality", max_sites, horizon, |case, rng| {
        let t = rng.random_range(0.0..=case.horizon);
        let set = case.events()?;
        Ok(set.check_duality(&case.a, &case.b, case.horizon)? && set.check_duality(&case.a, &case.b, t)?)
    })
}

/// Additivity `X_t(a v b) = X_t(a) v X_t(b)` and order preservation
/// `a <= a v b => X_t(a) <= X_t(a v b)`, for the forward process or the dual.
pub fn additivity_trials(which: Direction, trials: usize, max_sites: usize, horizon: f64, seed: u64) -> TrialReport {
    let label = match which {
        Direction::Forward => "additivity-forward",
        Direction::Dual => "additivity-dual",
    };
    run_trials(trials, seed, label, max_sites, horizon, move |case, rng| {
        let t = rng.random_range(0.0..=case.horizon);
        let set = case.events()?;
        let run = |c: &Configuration| match which {
            Direction::Forward => set.evolve_forward(c, t).map(|tr| tr.final_state),
            Direction::Dual => set.evolve_dual(c, t).map(|tr| tr.final_state),
        };
        let join = case.a.join(&case.b)?;
        let (xa, xb, xj) = (run(&case.a)?, run(&case.b)?, run(&join)?);
        // a below b pointwise: also a direct order check
        let lower = Configuration::new(
            case.a
                .states()
                .iter()
                .zip(case.b.states())
                .map(|(&x, &y)| x.min(y))
                .collect(),
        );
        let xl = run(&lower)?;
        Ok(xj == xa.join(&xb)? && xa.leq(&xj)? && xb.leq(&xj)? && xl.leq(&xa)? && xl.leq(&xb)?)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Knob {
    Lambda,
    Gamma,
    Delta,
}

/// Superposition coupling: add an independent stream of transmissions,
/// maturations or juvenile deaths to a base event set. Raising `lambda` or
/// `gamma` must not lower the forward state anywhere; raising `delta` must
/// not raise it.
pub fn monotone_trials(knob: Knob, trials: usize, max_sites: usize, horizon: f64, seed: u64) -> TrialReport {
    let label = match knob {
        Knob::Lambda => "monotone-lambda",
        Knob::Gamma => "monotone-gamma",
        Knob::Delta => "monotone-delta",
    };
    run_trials(trials, seed, label, max_sites, horizon, move |case, rng| {
        let t = rng.random_range(0.0..=case.horizon);
        let extra = rng.random_range(0.0..=3.0);
        let rates = match knob {
            Knob::Lambda => StreamRates::transmission_only(extra),
            Knob::Gamma => StreamRates::maturation_only(extra),
            Knob::Delta => StreamRates::juvenile_death_only(extra),
        };
        let base = case.events()?;
        let more = EventSet::sample_streams(
            &case.graph,
            &rates,
            case.params.contact_mode(),
            case.horizon,
            rng.random(),
            DEFAULT_EVENT_CAP,
        )?;
        let raised = base.superpose(&more)?;
        let before = base.evolve_forward(&case.a, t)?.final_state;
        let after = raised.evolve_forward(&case.a, t)?.final_state;
        match knob {
            Knob::Lambda | Knob::Gamma => before.leq(&after),
            Knob::Delta => after.leq(&before),
        }
    })
}

/// Which simulator produces a marginal table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Simulator {
    Graphical,
    Ctmc,
    Engine,
}

/// `counts[x][s]`: replicates with site `x` in state `s` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub replicates: usize,
    pub counts: Vec<[usize; 3]>,
}

impl Marginals {
    pub fn frequency(&self, site: usize, state: SiteState) -> f64 {
        self.counts[site][state.as_u8() as usize] as f64 / self.replicates as f64
    }

    /// Largest `|f1 - f2| / se` over every (site, state) cell, with
    /// `se = sqrt(f1 (1 - f1) / n1 + f2 (1 - f2) / n2)`. A cell where both
    /// standard errors vanish contributes 0 if the frequencies agree and
    /// infinity otherwise.
    pub fn max_z(&self, other: &Marginals) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.counts.len() {
            for s in SiteState::ALL {
                let (a, b) = (self.frequency(x, s), other.frequency(x, s));
                let se = (a * (1.0 - a) / self.replicates as f64 + b * (1.0 - b) / other.replicates as f64).sqrt();
                let z = if se > 0.0 {
                    (a - b).abs() / se
                } else if a == b {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
        worst
    }
}

/// Marginal state frequencies at time `t` from `replicates` independent runs.
pub fn marginals(
    simulator: Simulator,
    graph: &FiniteGraph,
    params: &Params,
    init: &Configuration,
    which: Direction,
    t: f64,
    replicates: usize,
    seed: u64,
) -> Result<Marginals> {
    let params = params.validated()?;
    if init.len() != graph.site_count() {
        return Err(crate::error::Error::LengthMismatch(init.len(), graph.site_count()));
    }
    let seed = derive_seed(seed, &[tag("marginals"), simulator as u64]);
    let finals: Vec<Result<Configuration>> = map_replicates(replicates, |i| match simulator {
        Simulator::Graphical => {
            let set = EventSet::sample(graph, &params, t.max(f64::MIN_POSITIVE), derive_seed(seed, &[i as u64]))?;
            let tr = match which {
                Direction::Forward => set.evolve_forward(init, t)?,
                Direction::Dual => set.evolve_dual(init, t)?,
            };
            Ok(tr.final_state)
        }
        Simulator::Ctmc => {
            Ok(ctmc::run(graph, &params, init, which, t, &mut replicate_rng(seed, i as u64))?.final_state)
        }
        Simulator::Engine => {
            let mut engine = ActiveSetEngine::new(graph, params, which)?;
            engine.reset(init)?;
            engine.run(t, &mut replicate_rng(seed, i as u64), |_, _, _, _| {});
            Ok(engine.configuration())
        }
    });
    let mut counts = vec![[0usize; 3]; graph.site_count()];
    for c in finals {
        let c = c?;
        for (x, s) in c.states().iter().enumerate() {
            counts[x][s.as_u8() as usize] += 1;
        }
    }
    Ok(Marginals { replicates, counts })
}

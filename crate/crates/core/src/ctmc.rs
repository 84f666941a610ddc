//! Direct continuous-time Markov chain simulation from the rate tables.
//!
//! Forward: a vacant site with `n2` mature neighbors becomes 1 at rate
//! `lambda * n2`, `1 -> 2` at `gamma`, `1 -> 0` at `1 + delta`, `2 -> 0` at 1.
//! Dual: `0 -> 1` at `lambda * n2` (counting dual 2's), `1 -> 2` at `gamma`,
//! `2 -> 1` at `delta`, `1, 2 -> 0` at 1. In contact mode births are 2's and
//! juveniles do not occur.
//!
//! This is the independent reference for the graphical construction: it never
//! touches an event set, and selects transitions by a linear scan of the full
//! rate table.

use rand::Rng;
use rand_distr::Exp1;

use crate::configuration::{Configuration, SiteState};
use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::params::{Direction, Params};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub site: usize,
    pub to: SiteState,
    pub rate: f64,
}

/// Enabled transitions of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub transitions: Vec<Transition>,
}

impl RateTable {
    pub fn total(&self) -> f64 {
        self.transitions.iter().map(|t| t.rate).sum()
    }
}

fn strong_neighbors(graph: &FiniteGraph, c: &Configuration, x: usize) -> usize {
    graph
        .neighbors(x)
        .iter()
        .filter(|&&y| c.get(y) == SiteState::Mature)
        .count()
}

fn site_transitions(
    params: &Params,
    which: Direction,
    state: SiteState,
    n2: usize,
    x: usize,
    out: &mut Vec<Transition>,
) {
    use SiteState::*;
    let contact = params.contact_mode();
    let gamma = params.gamma_rate();
    let mut push = |to, rate: f64| {
        if rate > 0.0 {
            out.push(Transition { site: x, to, rate });
        }
    };
    match (which, state) {
        (_, Vacant) => push(if contact { Mature } else { Juvenile }, params.lambda * n2 as f64),
        (Direction::Forward, Juvenile) => {
            if !contact {
                push(Mature, gamma);
            }
            push(Vacant, 1.0 + params.delta);
        }
        (Direction::Forward, Mature) => push(Vacant, 1.0),
        (Direction::Dual, Juvenile) => {
            if !contact {
                push(Mature, gamma);
            }
            push(Vacant, 1.0);
        }
        (Direction::Dual, Mature) => {
            if !contact {
                push(Juvenile, params.delta);
            }
            push(Vacant, 1.0);
        }
    }
}

pub fn rate_table(graph: &FiniteGraph, params: &Params, c: &Configuration, which: Direction) -> RateTable {
    let mut transitions = Vec::new();
    for x in 0..c.len() {
        site_transitions(
            params,
            which,
            c.get(x),
            strong_neighbors(graph, c, x),
            x,
            &mut transitions,
        );
    }
    RateTable { transitions }
}

pub fn total_rate(graph: &FiniteGraph, params: &Params, c: &Configuration, which: Direction) -> f64 {
    rate_table(graph, params, c, which).total()
}

/// One jump: the exponential holding time and the configuration after it.
pub fn step<R: Rng + ?Sized>(
    graph: &FiniteGraph,
    params: &Params,
    c: &Configuration,
    which: Direction,
    rng: &mut R,
) -> Result<(f64, Configuration)> {
    let table = rate_table(graph, params, c, which);
    let total = table.total();
    if total <= 0.0 {
        return Err(Error::Absorbing);
    }
    let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
    let chosen = choose(&table.transitions, total, rng);
    let mut next = c.clone();
    next.set(chosen.site, chosen.to);
    Ok((wait, next))
}

fn choose<'a, R: Rng + ?Sized>(transitions: &'a [Transition], total: f64, rng: &mut R) -> &'a Transition {
    let mut u = rng.random::<f64>() * total;
    for t in transitions {
        if u < t.rate {
            return t;
        }
        u -= t.rate;
    }
    transitions.last().expect("nonempty when total > 0")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtmcOutcome {
    pub final_state: Configuration,
    /// Time of absorption, if the chain stopped before `t_max`.
    pub absorbed_at: Option<f64>,
    pub jumps: usize,
}

/// Simulator that keeps the strong-neighbor counts up to date across jumps.
pub struct CtmcSimulator<'g> {
    graph: &'g FiniteGraph,
    params: Params,
    which: Direction,
    state: Configuration,
    n2: Vec<usize>,
    table: Vec<Transition>,
}

impl<'g> CtmcSimulator<'g> {
    pub fn new(graph: &'g FiniteGraph, params: Params, which: Direction, init: &Configuration) -> Result<Self> {
        if init.len() != graph.site_count() {
            return Err(Error::LengthMismatch(init.len(), graph.site_count()));
        }
        let mut state = init.clone();
        if params.contact_mode() {
            for x in 0..state.len() {
                if state.get(x) == SiteState::Juvenile {
                    state.set(x, SiteState::Mature);
                }
            }
        }
        let n2 = (0..state.len()).map(|x| strong_neighbors(graph, &state, x)).collect();
        Ok(Self {
            graph,
            params,
            which,
            state,
            n2,
            table: Vec::new(),
        })
    }

    pub fn state(&self) -> &Configuration {
        &self.state
    }

    fn set(&mut self, x: usize, to: SiteState) {
        let was = self.state.get(x) == SiteState::Mature;
        let now = to == SiteState::Mature;
        self.state.set(x, to);
        if was != now {
            for &y in self.graph.neighbors(x) {
                if now {
                    self.n2[y] += 1;
                } else {
                    self.n2[y] -= 1;
                }
            }
        }
        debug_assert!((0..self.state.len()).all(|y| self.n2[y] == strong_neighbors(self.graph, &self.state, y)));
    }

    /// Holding time and applied transition, or `None` if absorbed.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(f64, Transition)> {
        self.table.clear();
        for x in 0..self.state.len() {
            site_transitions(
                &self.params,
                self.which,
                self.state.get(x),
                self.n2[x],
                x,
                &mut self.table,
            );
        }
        let total: f64 = self.table.iter().map(|t| t.rate).sum();
        if total <= 0.0 {
            return None;
        }
        let wait = rng.sample::<f64, _>(Exp1) / total;
        let chosen = *choose(&self.table, total, rng);
        self.set(chosen.site, chosen.to);
        Some((wait, chosen))
    }

    /// Jump until `t_max` is passed or the chain is absorbed.
    pub fn run<R: Rng + ?Sized>(mut self, t_max: f64, rng: &mut R) -> CtmcOutcome {
        let mut t = 0.0;
        let mut jumps = 0;
        loop {
            let before = self.state.clone();
            match self.step(rng) {
                None => {
                    return CtmcOutcome {
                        final_state: self.state,
                        absorbed_at: Some(t),
                        jumps,
                    }
                }
                Some((wait, _)) => {
                    if t + wait > t_max {
                        return CtmcOutcome {
                            final_state: before,
                            absorbed_at: None,
                            jumps,
                        };
                    }
                    t += wait;
                    jumps += 1;
                }
            }
        }
    }
}

/// Run the chain from `xi0` up to `t_max`.
pub fn run<R: Rng + ?Sized>(
    graph: &FiniteGraph,
    params: &Params,
    xi0: &Configuration,
    which: Direction,
    t_max: f64,
    rng: &mut R,
) -> Result<CtmcOutcome> {
    let params = params.validated()?;
    Ok(CtmcSimulator::new(graph, params, which, xi0)?.run(t_max, rng))
}

//! Event-driven simulation restricted to the active part of the graph.
//!
//! Equal in law to reading a sampled event set, but only the events that can
//! change the state are ever generated: deaths at active sites, maturations
//! and juvenile deaths at the sites they affect, and transmissions along
//! directed edges from a strong (state 2) site to a vacant one. The total
//! rate is kept as a handful of counters, so each jump costs `O(max degree)`
//! regardless of graph size.

use rand::Rng;
use rand_distr::Exp1;

use crate::configuration::{Configuration, SiteState};
use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::params::{Direction, Params};

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone)]
struct IndexedSet {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl IndexedSet {
    fn new(universe: usize) -> Self {
        Self {
            items: Vec::new(),
            pos: vec![ABSENT; universe],
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn insert(&mut self, v: usize) {
        if self.pos[v] == ABSENT {
            self.pos[v] = self.items.len();
            self.items.push(v);
        }
    }

    fn remove(&mut self, v: usize) {
        let p = self.pos[v];
        if p != ABSENT {
            let last = self.items.pop().expect("nonempty");
            if last != v {
                self.items[p] = last;
                self.pos[last] = p;
            }
            self.pos[v] = ABSENT;
        }
    }

    fn clear(&mut self) {
        for &v in &self.items {
            self.pos[v] = ABSENT;
        }
        self.items.clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    /// Time at which the last active site vanished, if before `t_max`.
    pub extinct_at: Option<f64>,
    pub jumps: u64,
}

/// Reusable simulator for one graph, parameter set and direction.
#[derive(Debug, Clone)]
pub struct ActiveSetEngine<'g> {
    graph: &'g FiniteGraph,
    params: Params,
    which: Direction,
    state: Vec<SiteState>,
    juveniles: IndexedSet,
    strong: IndexedSet,
    frontier: IndexedSet,
}

impl<'g> ActiveSetEngine<'g> {
    pub fn new(graph: &'g FiniteGraph, params: Params, which: Direction) -> Result<Self> {
        let params = params.validated()?;
        let n = graph.site_count();
        Ok(Self {
            graph,
            params,
            which,
            state: vec![SiteState::Vacant; n],
            juveniles: IndexedSet::new(n),
            strong: IndexedSet::new(n),
            frontier: IndexedSet::new(graph.directed_edge_count()),
        })
    }

    pub fn graph(&self) -> &'g FiniteGraph {
        self.graph
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn state(&self) -> &[SiteState] {
        &self.state
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::new(self.state.clone())
    }

    pub fn active_count(&self) -> usize {
        self.juveniles.len() + self.strong.len()
    }

    /// Active sites, in no particular order.
    pub fn active_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.juveniles.items.iter().chain(&self.strong.items).copied()
    }

    /// Start over from `init`. Juveniles are promoted in contact mode.
    pub fn reset(&mut self, init: &Configuration) -> Result<()> {
        if init.len() != self.state.len() {
            return Err(Error::LengthMismatch(init.len(), self.state.len()));
        }
        for &x in self.juveniles.items.iter().chain(&self.strong.items) {
            self.state[x] = SiteState::Vacant;
        }
        self.juveniles.clear();
        self.strong.clear();
        self.frontier.clear();
        let contact = self.params.contact_mode();
        for (x, &s) in init.states().iter().enumerate() {
            let s = if contact && s == SiteState::Juvenile {
                SiteState::Mature
            } else {
                s
            };
            if s.is_active() {
                self.set(x, s);
            }
        }
        Ok(())
    }

    fn frontier_edge(&self, e: usize, from: usize) -> bool {
        self.state[from] == SiteState::Mature && self.state[self.graph.edge_target(e)] == SiteState::Vacant
    }

    fn set(&mut self, x: usize, to: SiteState) {
        let from = self.state[x];
        if from == to {
            return;
        }
        match from {
            SiteState::Juvenile => self.juveniles.remove(x),
            SiteState::Mature => self.strong.remove(x),
            SiteState::Vacant => {}
        }
        match to {
            SiteState::Juvenile => self.juveniles.insert(x),
            SiteState::Mature => self.strong.insert(x),
            SiteState::Vacant => {}
        }
        self.state[x] = to;
        let g = self.graph;
        for e in g.out_edges(x) {
            if self.frontier_edge(e, x) {
                self.frontier.insert(e);
            } else {
                self.frontier.remove(e);
            }
            let back = g.reverse_edge(e);
            if self.frontier_edge(back, g.edge_target(e)) {
                self.frontier.insert(back);
            } else {
                self.frontier.remove(back);
            }
        }
    }

    fn birth_state(&self) -> SiteState {
        if self.params.contact_mode() {
            SiteState::Mature
        } else {
            SiteState::Juvenile
        }
    }

    /// Advance until `t_max` or extinction, reporting every change as
    /// `(time, site, from, to)`.
    pub fn run<R, F>(&mut self, t_max: f64, rng: &mut R, mut observe: F) -> RunOutcome
    where
        R: Rng + ?Sized,
        F: FnMut(f64, usize, SiteState, SiteState),
    {
        let contact = self.params.contact_mode();
        let gamma = if contact { 0.0 } else { self.params.gamma_rate() };
        let delta = if contact { 0.0 } else { self.params.delta };
        let lambda = self.params.lambda;
        let mut t = 0.0;
        let mut jumps = 0;
        loop {
            let nj = self.juveniles.len();
            let ns = self.strong.len();
            if nj + ns == 0 {
                return RunOutcome {
                    extinct_at: Some(t),
                    jumps,
                };
            }
            // delta acts on juveniles going forward, on strong sites in the dual
            let n_delta = match self.which {
                Direction::Forward => nj,
                Direction::Dual => ns,
            };
            let r_death = (nj + ns) as f64;
            let r_mature = gamma * nj as f64;
            let r_delta = delta * n_delta as f64;
            let r_birth = lambda * self.frontier.len() as f64;
            let total = r_death + r_mature + r_delta + r_birth;
            t += rng.sample::<f64, _>(Exp1) / total;
            if t > t_max {
                return RunOutcome {
                    extinct_at: None,
                    jumps,
                };
            }
            jumps += 1;
            let mut u = rng.random::<f64>() * total;
            let (x, to) = if u < r_death {
                let k = rng.random_range(0..nj + ns);
                let x = if k < nj {
                    self.juveniles.items[k]
                } else {
                    self.strong.items[k - nj]
                };
                (x, SiteState::Vacant)
            } else if {
                u -= r_death;
                u < r_mature
            } {
                (self.juveniles.items[rng.random_range(0..nj)], SiteState::Mature)
            } else if {
                u -= r_mature;
                u < r_delta && n_delta > 0
            } {
                match self.which {
                    Direction::Forward => (self.juveniles.items[rng.random_range(0..nj)], SiteState::Vacant),
                    Direction::Dual => (self.strong.items[rng.random_range(0..ns)], SiteState::Juvenile),
                }
            } else if !self.frontier.items.is_empty() {
                let e = self.frontier.items[rng.random_range(0..self.frontier.len())];
                (self.graph.edge_target(e), self.birth_state())
            } else {
                // rounding put u past the last nonzero bucket
                continue;
            };
            let from = self.state[x];
            self.set(x, to);
            observe(t, x, from, to);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn c(s: &str) -> Configuration {
        s.parse().unwrap()
    }

    fn check_frontier(e: &ActiveSetEngine) {
        let g = e.graph;
        let mut expected: Vec<usize> = (0..g.directed_edge_count())
            .filter(|&k| e.frontier_edge(k, g.edge_source(k)))
            .collect();
        let mut got = e.frontier.items.clone();
        expected.sort_unstable();
        got.sort_unstable();
        assert_eq!(got, expected);
    }

    #[test]
    fn frontier_stays_consistent() {
        let g = FiniteGraph::cycle(7);
        let p = Params::new(2.0, 1.0, 0.5).unwrap();
        for which in [Direction::Forward, Direction::Dual] {
            let mut e = ActiveSetEngine::new(&g, p, which).unwrap();
            e.reset(&c("2100210")).unwrap();
            check_frontier(&e);
            let mut rng = rng_from_seed(5);
            let mut steps = 0;
            e.run(3.0, &mut rng, |_, _, _, _| steps += 1);
            check_frontier(&e);
            e.reset(&c("0000002")).unwrap();
            check_frontier(&e);
            assert_eq!(e.active_count(), 1);
        }
    }

    #[test]
    fn observer_sees_every_change() {
        let g = FiniteGraph::path(6);
        let p = Params::new(3.0, 2.0, 0.1).unwrap();
        let mut e = ActiveSetEngine::new(&g, p, Direction::Forward).unwrap();
        let init = c("002000");
        e.reset(&init).unwrap();
        let mut replay = init.clone();
        let mut last_t = 0.0;
        let mut rng = rng_from_seed(6);
        e.run(5.0, &mut rng, |t, x, from, to| {
            assert!(t >= last_t);
            last_t = t;
            assert_eq!(replay.get(x), from);
            replay.set(x, to);
        });
        assert_eq!(replay, e.configuration());
    }

    #[test]
    fn no_births_without_lambda() {
        let g = FiniteGraph::path(3);
        let p = Params::new(0.0, 1.0, 0.0).unwrap();
        let mut e = ActiveSetEngine::new(&g, p, Direction::Forward).unwrap();
        e.reset(&c("020")).unwrap();
        let out = e.run(1e9, &mut rng_from_seed(1), |_, x, _, _| assert_eq!(x, 1));
        assert!(out.extinct_at.is_some());
        assert!(e.configuration().is_empty());
    }

    #[test]
    fn contact_mode_births_are_mature() {
        let g = FiniteGraph::cycle(8);
        let p = Params::contact(3.0, 1.0).unwrap();
        let mut e = ActiveSetEngine::new(&g, p, Direction::Dual).unwrap();
        e.reset(&c("10000000")).unwrap();
        assert_eq!(e.state()[0], SiteState::Mature);
        e.run(4.0, &mut rng_from_seed(2), |_, _, _, to| {
            assert_ne!(to, SiteState::Juvenile)
        });
    }
}

//! The spacetime event structure and the two ways of reading it.
//!
//! Four families of independent Poisson events are placed on `V x [0, T]`:
//! rate-1 deaths at every site, rate-`delta` juvenile deaths at every site,
//! rate-`gamma` maturations at every site and rate-`lambda` transmissions on
//! every *directed* edge. A vacant site with `k` mature neighbors is therefore
//! hit by transmissions at total rate `k * lambda`.
//!
//! The forward process reads the events upward in time. The on-off dual
//! reads the same events downward from time `t`, with the effects
//!
//! | event at `x`          | forward                      | dual                               |
//! |-----------------------|------------------------------|------------------------------------|
//! | death                 | `x <- 0`                     | `x <- 0`                           |
//! | juvenile death        | `1 -> 0`                     | `2 -> 1`                           |
//! | maturation            | `1 -> 2`                     | `1 -> 2`                           |
//! | transmission `y -> x` | `x: 0 -> 1` if `y` is 2      | `y <- max(y, 1)` if `x` is 2       |
//!
//! and for every event set, `xi_t ~ zeta_0` iff `xi_0 ~ zeta_t`.
//!
//! In contact mode (`gamma = infinity`) there are no maturation events,
//! juveniles mature the instant they appear, and both readings collapse to
//! the classical self-dual contact process on `{0, 2}`.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::configuration::{Configuration, SiteState};
use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::params::Params;
use crate::rng::{rng_from_seed, SimRng};

/// Cap on the expected number of events in one sampled window.
pub const DEFAULT_EVENT_CAP: f64 = 5.0e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Death { site: usize },
    JuvenileDeath { site: usize },
    Maturation { site: usize },
    Transmission { from: usize, to: usize },
}

impl EventKind {
    // fixed total order used to break (measure-zero) timestamp ties
    fn tie_key(&self) -> (u8, usize, usize) {
        match *self {
            EventKind::Death { site } => (0, site, 0),
            EventKind::JuvenileDeath { site } => (1, site, 0),
            EventKind::Maturation { site } => (2, site, 0),
            EventKind::Transmission { from, to } => (3, from, to),
        }
    }

    /// Effect on a forward configuration: the site that changes and its new
    /// state, or `None` if the event does nothing.
    pub fn forward_effect(&self, xi: &Configuration, contact: bool) -> Option<(usize, SiteState)> {
        use SiteState::*;
        match *self {
            EventKind::Death { site } => xi.get(site).is_active().then_some((site, Vacant)),
            EventKind::JuvenileDeath { site } => (xi.get(site) == Juvenile).then_some((site, Vacant)),
            EventKind::Maturation { site } => (xi.get(site) == Juvenile).then_some((site, Mature)),
            EventKind::Transmission { from, to } => {
                let born = if contact { Mature } else { Juvenile };
                (xi.get(from) == Mature && xi.get(to) == Vacant).then_some((to, born))
            }
        }
    }

    /// Effect on a dual configuration when the event is crossed downward.
    pub fn dual_effect(&self, zeta: &Configuration, contact: bool) -> Option<(usize, SiteState)> {
        use SiteState::*;
        match *self {
            EventKind::Death { site } => zeta.get(site).is_active().then_some((site, Vacant)),
            EventKind::JuvenileDeath { site } => (!contact && zeta.get(site) == Mature).then_some((site, Juvenile)),
            EventKind::Maturation { site } => (zeta.get(site) == Juvenile).then_some((site, Mature)),
            EventKind::Transmission { from, to } => {
                let floor = if contact { Mature } else { Juvenile };
                let cur = zeta.get(from);
                (zeta.get(to) == Mature && cur < floor).then_some((from, floor))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

impl Event {
    fn order(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.kind.tie_key().cmp(&other.kind.tie_key()))
    }
}

/// Per-stream Poisson rates used to sample an [`EventSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamRates {
    pub death: f64,
    pub juvenile_death: f64,
    pub maturation: f64,
    pub transmission: f64,
}

impl StreamRates {
    pub fn of(params: &Params) -> Self {
        Self {
            death: 1.0,
            juvenile_death: params.delta,
            maturation: params.gamma_rate(),
            transmission: params.lambda,
        }
    }

    /// Only transmissions, at `rate`: the extra streams in a lambda coupling.
    pub fn transmission_only(rate: f64) -> Self {
        Self {
            death: 0.0,
            juvenile_death: 0.0,
            maturation: 0.0,
            transmission: rate,
        }
    }

    pub fn maturation_only(rate: f64) -> Self {
        Self {
            death: 0.0,
            juvenile_death: 0.0,
            maturation: rate,
            transmission: 0.0,
        }
    }

    pub fn juvenile_death_only(rate: f64) -> Self {
        Self {
            death: 0.0,
            juvenile_death: rate,
            maturation: 0.0,
            transmission: 0.0,
        }
    }

    fn expected_events(&self, graph: &FiniteGraph, horizon: f64) -> f64 {
        let n = graph.site_count() as f64;
        let e = graph.directed_edge_count() as f64;
        horizon * (n * (self.death + self.juvenile_death + self.maturation) + e * self.transmission)
    }
}

/// A sampled spacetime graph on `[0, horizon]`, stored as one list sorted by
/// time with ties broken by event kind and then site/edge index.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSet {
    horizon: f64,
    seed: u64,
    site_count: usize,
    contact_mode: bool,
    events: Vec<Event>,
}

fn push_stream(out: &mut Vec<Event>, rng: &mut SimRng, rate: f64, horizon: f64, kind: EventKind) {
    if rate <= 0.0 {
        return;
    }
    let mut t = 0.0;
    loop {
        let gap: f64 = rng.sample(Exp1);
        t += gap / rate;
        if t >= horizon {
            break;
        }
        if t > 0.0 {
            out.push(Event { time: t, kind });
        }
    }
}

impl EventSet {
    pub fn sample(graph: &FiniteGraph, params: &Params, horizon: f64, seed: u64) -> Result<Self> {
        Self::sample_with_cap(graph, params, horizon, seed, DEFAULT_EVENT_CAP)
    }

    pub fn sample_with_cap(graph: &FiniteGraph, params: &Params, horizon: f64, seed: u64, cap: f64) -> Result<Self> {
        let params = params.validated()?;
        Self::sample_streams(
            graph,
            &StreamRates::of(&params),
            params.contact_mode(),
            horizon,
            seed,
            cap,
        )
    }

    /// Sample independent homogeneous Poisson streams at the given rates.
    ///
    /// Streams are drawn in a fixed order (per site: death, juvenile death,
    /// maturation; then per directed edge in edge-id order) from one
    /// generator, so the result is a function of the arguments alone.
    pub fn sample_streams(
        graph: &FiniteGraph,
        rates: &StreamRates,
        contact_mode: bool,
        horizon: f64,
        seed: u64,
        cap: f64,
    ) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Param(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        for (name, r) in [
            ("death", rates.death),
            ("juvenile death", rates.juvenile_death),
            ("maturation", rates.maturation),
            ("transmission", rates.transmission),
        ] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Param(format!(
                    "{name} rate must be finite and nonnegative, got {r}"
                )));
            }
        }
        let expected = rates.expected_events(graph, horizon);
        if expected > cap {
            return Err(Error::EventBudget { expected, cap });
        }
        let mut rng = rng_from_seed(seed);
        let mut events = Vec::with_capacity((expected * 1.1) as usize + 16);
        let maturation = if contact_mode { 0.0 } else { rates.maturation };
        for site in 0..graph.site_count() {
            push_stream(&mut events, &mut rng, rates.death, horizon, EventKind::Death { site });
            push_stream(
                &mut events,
                &mut rng,
                rates.juvenile_death,
                horizon,
                EventKind::JuvenileDeath { site },
            );
            push_stream(
                &mut events,
                &mut rng,
                maturation,
                horizon,
                EventKind::Maturation { site },
            );
        }
        for (from, to) in graph.directed_edges() {
            push_stream(
                &mut events,
                &mut rng,
                rates.transmission,
                horizon,
                EventKind::Transmission { from, to },
            );
        }
        events.sort_unstable_by(Event::order);
        Ok(Self {
            horizon,
            seed,
            site_count: graph.site_count(),
            contact_mode,
            events,
        })
    }

    /// Union of two event sets on the same sites and horizon. Used for
    /// monotone couplings: adding events of one kind to a base set.
    pub fn superpose(&self, extra: &EventSet) -> Result<EventSet> {
        if self.site_count != extra.site_count {
            return Err(Error::LengthMismatch(self.site_count, extra.site_count));
        }
        if self.horizon != extra.horizon {
            return Err(Error::Param("superposed event sets must share a horizon".into()));
        }
        let mut events = Vec::with_capacity(self.events.len() + extra.events.len());
        let (mut i, mut j) = (0, 0);
        while i < self.events.len() && j < extra.events.len() {
            if self.events[i].order(&extra.events[j]) != Ordering::Greater {
                events.push(self.events[i]);
                i += 1;
            } else {
                events.push(extra.events[j]);
                j += 1;
            }
        }
        events.extend_from_slice(&self.events[i..]);
        events.extend_from_slice(&extra.events[j..]);
        Ok(EventSet {
            events,
            ..self.clone_header()
        })
    }

    fn clone_header(&self) -> EventSet {
        EventSet {
            horizon: self.horizon,
            seed: self.seed,
            site_count: self.site_count,
            contact_mode: self.contact_mode,
            events: Vec::new(),
        }
    }

    /// Build directly from a list of events; they are sorted on entry.
    pub fn from_events(site_count: usize, horizon: f64, contact_mode: bool, mut events: Vec<Event>) -> Result<Self> {
        for ev in &events {
            if !(ev.time > 0.0 && ev.time < horizon) {
                return Err(Error::Param(format!("event time {} outside (0, {horizon})", ev.time)));
            }
            let in_range = match ev.kind {
                EventKind::Death { site } | EventKind::JuvenileDeath { site } | EventKind::Maturation { site } => {
                    site < site_count
                }
                EventKind::Transmission { from, to } => from < site_count && to < site_count && from != to,
            };
            if !in_range {
                return Err(Error::Param(format!("event {:?} refers to a missing site", ev.kind)));
            }
        }
        events.sort_unstable_by(Event::order);
        Ok(Self {
            horizon,
            seed: 0,
            site_count,
            contact_mode,
            events,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn contact_mode(&self) -> bool {
        self.contact_mode
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Sorted times of the events matching `kind` exactly.
    pub fn stream(&self, kind: EventKind) -> Vec<f64> {
        self.events.iter().filter(|e| e.kind == kind).map(|e| e.time).collect()
    }

    fn window(&self, t: f64) -> Result<&[Event]> {
        if !(t >= 0.0) || t > self.horizon {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.horizon,
            });
        }
        let end = self.events.partition_point(|e| e.time <= t);
        Ok(&self.events[..end])
    }

    fn check_len(&self, c: &Configuration) -> Result<()> {
        if c.len() == self.site_count {
            Ok(())
        } else {
            Err(Error::LengthMismatch(c.len(), self.site_count))
        }
    }

    /// Run the forward process from `xi0` through the events in `[0, t]`.
    pub fn evolve_forward(&self, xi0: &Configuration, t: f64) -> Result<Trajectory> {
        self.check_len(xi0)?;
        let window = self.window(t)?;
        let mut state = xi0.clone();
        let mut changes = Vec::new();
        if self.contact_mode {
            promote_juveniles(&mut state, 0.0, &mut changes);
        }
        for ev in window {
            if let Some((site, to)) = ev.kind.forward_effect(&state, self.contact_mode) {
                changes.push(Change {
                    time: ev.time,
                    site,
                    from: state.get(site),
                    to,
                });
                state.set(site, to);
            }
        }
        Ok(Trajectory {
            initial: xi0.clone(),
            changes,
            final_state: state,
        })
    }

    /// Run the dual from `zeta0` placed at time `t`, down to time 0. Change
    /// times are recorded on the dual clock `s = t - (event time)`.
    pub fn evolve_dual(&self, zeta0: &Configuration, t: f64) -> Result<Trajectory> {
        self.check_len(zeta0)?;
        let window = self.window(t)?;
        let mut state = zeta0.clone();
        let mut changes = Vec::new();
        if self.contact_mode {
            promote_juveniles(&mut state, 0.0, &mut changes);
        }
        for ev in window.iter().rev() {
            if let Some((site, to)) = ev.kind.dual_effect(&state, self.contact_mode) {
                changes.push(Change {
                    time: t - ev.time,
                    site,
                    from: state.get(site),
                    to,
                });
                state.set(site, to);
            }
        }
        Ok(Trajectory {
            initial: zeta0.clone(),
            changes,
            final_state: state,
        })
    }

    /// Compare `xi_t ~ zeta_0` with `xi_0 ~ zeta_t`; always `true` for a
    /// correct engine.
    pub fn check_duality(&self, xi0: &Configuration, zeta0: &Configuration, t: f64) -> Result<bool> {
        let xi_t = self.evolve_forward(xi0, t)?.final_state;
        let zeta_t = self.evolve_dual(zeta0, t)?.final_state;
        Ok(xi_t.compatible(zeta0)? == xi0.compatible(&zeta_t)?)
    }
}

fn promote_juveniles(state: &mut Configuration, time: f64, changes: &mut Vec<Change>) {
    for x in 0..state.len() {
        if state.get(x) == SiteState::Juvenile {
            changes.push(Change {
                time,
                site: x,
                from: SiteState::Juvenile,
                to: SiteState::Mature,
            });
            state.set(x, SiteState::Mature);
        }
    }
}

/// One applied state change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Change {
    #[serde(rename = "t")]
    pub time: f64,
    pub site: usize,
    pub from: SiteState,
    pub to: SiteState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: Configuration,
    pub changes: Vec<Change>,
    pub final_state: Configuration,
}

impl Trajectory {
    /// Re-apply the recorded changes to the initial configuration.
    pub fn replay(&self) -> Configuration {
        let mut c = self.initial.clone();
        for ch in &self.changes {
            debug_assert_eq!(c.get(ch.site), ch.from);
            c.set(ch.site, ch.to);
        }
        c
    }
}

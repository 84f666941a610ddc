//! Brute-force derivation of the dual event rules.
//!
//! For one event and a dual state `zeta` after it (on the dual clock), the set
//! of forward states before the event that end up compatible with `zeta` is
//! computed by enumeration. That set must be `{xi : xi ~ zeta'}` for exactly
//! one `zeta'`, and `zeta'` must be what the dual rule produces.

use twostage::{Configuration, EventKind, SiteState};

fn all_configs(n: usize, alphabet: &[SiteState]) -> Vec<Configuration> {
    let k = alphabet.len();
    (0..k.pow(n as u32))
        .map(|mut code| {
            let mut states = Vec::with_capacity(n);
            for _ in 0..n {
                states.push(alphabet[code % k]);
                code /= k;
            }
            Configuration::new(states)
        })
        .collect()
}

fn apply_forward(ev: &EventKind, xi: &Configuration, contact: bool) -> Configuration {
    let mut out = xi.clone();
    if let Some((x, s)) = ev.forward_effect(xi, contact) {
        out.set(x, s);
    }
    out
}

fn apply_dual(ev: &EventKind, zeta: &Configuration, contact: bool) -> Configuration {
    let mut out = zeta.clone();
    if let Some((x, s)) = ev.dual_effect(zeta, contact) {
        out.set(x, s);
    }
    out
}

fn events(n: usize) -> Vec<EventKind> {
    let mut evs = Vec::new();
    for site in 0..n {
        evs.push(EventKind::Death { site });
        evs.push(EventKind::JuvenileDeath { site });
        evs.push(EventKind::Maturation { site });
        for to in 0..n {
            if to != site {
                evs.push(EventKind::Transmission { from: site, to });
            }
        }
    }
    evs
}

fn check(n: usize, alphabet: &[SiteState], contact: bool) {
    let configs = all_configs(n, alphabet);
    for ev in events(n) {
        if contact && matches!(ev, EventKind::Maturation { .. }) {
            continue;
        }
        for zeta in &configs {
            let target: Vec<bool> = configs
                .iter()
                .map(|xi| apply_forward(&ev, xi, contact).compatible(zeta).unwrap())
                .collect();
            let matches: Vec<&Configuration> = configs
                .iter()
                .filter(|cand| {
                    configs
                        .iter()
                        .zip(&target)
                        .all(|(xi, &want)| xi.compatible(cand).unwrap() == want)
                })
                .collect();
            assert_eq!(matches.len(), 1, "event {ev:?}, zeta {zeta}: not dualizable");
            assert_eq!(&apply_dual(&ev, zeta, contact), matches[0], "event {ev:?}, zeta {zeta}");
        }
    }
}

#[test]
fn dual_rules_match_dualizable_sets() {
    use SiteState::*;
    for n in 1..=3 {
        check(n, &[Vacant, Juvenile, Mature], false);
    }
}

#[test]
fn contact_mode_dual_rules() {
    use SiteState::*;
    for n in 1..=3 {
        check(n, &[Vacant, Mature], true);
    }
}

#[test]
fn dual_transmission_never_demotes() {
    // zeta = (1, 2) with forward transmission 1 -> 0: site 1 stays 2
    let ev = EventKind::Transmission { from: 1, to: 0 };
    let zeta: Configuration = "22".parse().unwrap();
    assert_eq!(apply_dual(&ev, &zeta, false).to_string(), "22");
    let zeta: Configuration = "12".parse().unwrap();
    assert_eq!(apply_dual(&ev, &zeta, false).to_string(), "12");
}

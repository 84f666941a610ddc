//! Pathwise properties of the graphical construction under shared event sets.

use proptest::prelude::*;
use twostage::graphical::DEFAULT_EVENT_CAP;
use twostage::{Configuration, EventSet, FiniteGraph, Params, SiteState, StreamRates};

fn graph_strategy() -> impl Strategy<Value = FiniteGraph> {
    prop_oneof![
        (1usize..=5).prop_map(FiniteGraph::path),
        (3usize..=5).prop_map(FiniteGraph::cycle),
        (1usize..=4).prop_map(FiniteGraph::star),
        // random simple graph on up to 5 sites
        (2usize..=5, any::<u16>()).prop_map(|(n, bits)| {
            let mut lists = vec![Vec::new(); n];
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits >> (k % 16) & 1 == 1 {
                        lists[a].push(b);
                        lists[b].push(a);
                    }
                    k += 1;
                }
            }
            FiniteGraph::from_adjacency(&lists).unwrap()
        }),
    ]
}

fn params_strategy() -> impl Strategy<Value = Params> {
    prop_oneof![
        4 => (0.0..5.0f64, 0.0..5.0f64, 0.0..2.0f64).prop_map(|(l, g, d)| Params::new(l, g, d).unwrap()),
        1 => (0.0..5.0f64, 0.0..2.0f64).prop_map(|(l, d)| Params::contact(l, d).unwrap()),
    ]
}

fn config(n: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(0u8..3, n)
        .prop_map(|v| Configuration::new(v.into_iter().map(|b| SiteState::from_u8(b).unwrap()).collect()))
}

#[derive(Debug, Clone)]
struct Case {
    graph: FiniteGraph,
    params: Params,
    seed: u64,
    t: f64,
    a: Configuration,
    b: Configuration,
}

fn case() -> impl Strategy<Value = Case> {
    (graph_strategy(), params_strategy(), any::<u64>(), 0.0..=2.0f64).prop_flat_map(|(graph, params, seed, t)| {
        let n = graph.site_count();
        (config(n), config(n)).prop_map(move |(a, b)| Case {
            graph: graph.clone(),
            params,
            seed,
            t,
            a,
            b,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn duality(c in case()) {
        let set = EventSet::sample(&c.graph, &c.params, 2.0, c.seed).unwrap();
        prop_assert!(set.check_duality(&c.a, &c.b, c.t).unwrap());
    }

    #[test]
    fn additivity_and_order(c in case()) {
        let set = EventSet::sample(&c.graph, &c.params, 2.0, c.seed).unwrap();
        let join = c.a.join(&c.b).unwrap();
        let fwd = |x: &Configuration| set.evolve_forward(x, c.t).unwrap().final_state;
        let dual = |x: &Configuration| set.evolve_dual(x, c.t).unwrap().final_state;
        prop_assert_eq!(fwd(&join), fwd(&c.a).join(&fwd(&c.b)).unwrap());
        prop_assert_eq!(dual(&join), dual(&c.a).join(&dual(&c.b)).unwrap());
        prop_assert!(fwd(&c.a).leq(&fwd(&join)).unwrap());
        prop_assert!(dual(&c.b).leq(&dual(&join)).unwrap());
    }

    #[test]
    fn trajectories_replay(c in case()) {
        let set = EventSet::sample(&c.graph, &c.params, 2.0, c.seed).unwrap();
        let f = set.evolve_forward(&c.a, c.t).unwrap();
        prop_assert_eq!(f.replay(), f.final_state.clone());
        let d = set.evolve_dual(&c.a, c.t).unwrap();
        prop_assert_eq!(d.replay(), d.final_state.clone());
        for w in f.changes.windows(2) {
            prop_assert!(w[0].time <= w[1].time);
        }
    }

    #[test]
    fn monotone_in_parameters(c in case(), extra in 0.0..3.0f64, extra_seed in any::<u64>()) {
        prop_assume!(!c.params.contact_mode());
        let base = EventSet::sample(&c.graph, &c.params, 2.0, c.seed).unwrap();
        let couple = |rates: StreamRates| {
            let more = EventSet::sample_streams(&c.graph, &rates, false, 2.0, extra_seed, DEFAULT_EVENT_CAP).unwrap();
            base.superpose(&more).unwrap()
        };
        let small = base.evolve_forward(&c.a, c.t).unwrap().final_state;
        // more transmissions or maturations: larger
        for rates in [StreamRates::transmission_only(extra), StreamRates::maturation_only(extra)] {
            let big = couple(rates).evolve_forward(&c.a, c.t).unwrap().final_state;
            prop_assert!(small.leq(&big).unwrap());
        }
        // more juvenile deaths: smaller
        let fewer = couple(StreamRates::juvenile_death_only(extra)).evolve_forward(&c.a, c.t).unwrap().final_state;
        prop_assert!(fewer.leq(&small).unwrap());
    }
}

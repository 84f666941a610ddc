use twostage::estimators::{
    branching_offspring_bound_check, cluster_width, edge_speed, offspring_expectation_mc, survival_probability,
    upper_density, EdgeSide, EdgeSpeedSpec, SurvivalSpec,
};
use twostage::{Boundary, LatticeSpec, Params};

#[test]
fn sterile_line_dies() {
    let spec = SurvivalSpec::new(LatticeSpec::line(50), 200.0, 500);
    let s = survival_probability(&spec, &Params::new(20.0, 0.0, 0.0).unwrap(), 1).unwrap();
    assert_eq!(s.mean, 0.0);
}

#[test]
fn below_gamma_bound_dies_out() {
    let spec = SurvivalSpec::new(LatticeSpec::line(50), 50.0, 1000);
    let s = survival_probability(&spec, &Params::new(50.0, 0.25, 0.0).unwrap(), 2).unwrap();
    assert!(s.mean <= 0.01, "{s:?}");
}

#[test]
fn survival_grows_with_lambda() {
    let spec = SurvivalSpec::new(LatticeSpec::line(30), 30.0, 2000);
    let lo = survival_probability(&spec, &Params::new(2.0, 4.0, 0.0).unwrap(), 3).unwrap();
    let hi = survival_probability(&spec, &Params::new(6.0, 4.0, 0.0).unwrap(), 3).unwrap();
    assert!(hi.mean + 3.0 * hi.std_error >= lo.mean, "{lo:?} {hi:?}");
    assert!(hi.mean > lo.mean);
}

#[test]
fn offspring_series() {
    let s = offspring_expectation_mc(100_000, 7, 0.95).unwrap();
    assert!((s.mean.mean - 1.0).abs() <= 0.02, "{:?}", s.mean);
    assert!((s.zero_fraction.mean - 0.5).abs() <= 0.01);
    // P(N_X = k) = 2^-(k+1)
    for k in 1..4 {
        let f = s.counts[k] as f64 / 100_000.0;
        assert!((f - 0.5f64.powi(k as i32 + 1)).abs() < 0.01, "k={k} f={f}");
    }
}

#[test]
fn star_offspring_below_bound() {
    let p = Params::new(4.0, 0.5, 0.0).unwrap();
    let c = branching_offspring_bound_check(&p, 2, 20_000, 8).unwrap();
    assert!(c.within_bound, "{c:?}");
}

#[test]
fn edge_symmetry() {
    let p = Params::new(10.0, 10.0, 0.0).unwrap();
    let spec = EdgeSpeedSpec {
        half_extent: 60,
        range: 1,
        t_max: 10.0,
        replicates: 200,
        side: EdgeSide::Right,
        confidence: 0.99,
    };
    let right = edge_speed(&p, &spec, 4).unwrap();
    let left = edge_speed(
        &p,
        &EdgeSpeedSpec {
            side: EdgeSide::Left,
            ..spec
        },
        5,
    )
    .unwrap();
    assert!(right.alpha.lower > 0.0);
    let diff = right.alpha.mean + left.alpha.mean;
    let se = (right.alpha.std_error.powi(2) + left.alpha.std_error.powi(2)).sqrt();
    assert!(diff.abs() <= 3.0 * se, "{right:?} {left:?}");
}

#[test]
fn subcritical_clusters_are_small() {
    let p = Params::new(0.5, 4.0, 0.0).unwrap();
    let s = cluster_width(&p, &LatticeSpec::line(100), 1000.0, 2000, 6).unwrap();
    assert!(s.truncated_fraction < 0.01, "{}", s.truncated_fraction);
    assert!(s.mean_width.unwrap().mean < 5.0);
}

#[test]
fn density_non_increasing_in_time() {
    let p = Params::new(4.0, 4.0, 0.0).unwrap();
    let lattice = LatticeSpec::line(20).with_boundary(Boundary::Torus);
    let early = upper_density(&p, &SurvivalSpec::new(lattice, 5.0, 4000), 9)
        .unwrap()
        .active;
    let late = upper_density(&p, &SurvivalSpec::new(lattice, 20.0, 4000), 10)
        .unwrap()
        .active;
    assert!(late.mean <= early.mean + 3.0 * (early.std_error.powi(2) + late.std_error.powi(2)).sqrt());
    assert!(late.lower > 0.0);
}

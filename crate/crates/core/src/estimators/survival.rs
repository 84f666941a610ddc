use serde::{Deserialize, Serialize};

use super::{run_replicates, SurvivalSpec, DEFAULT_THETA};
use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::graph::{Boundary, FiniteGraph, LatticeSpec};
use crate::params::{Direction, Maturation, Params};
use crate::rng::{derive_seed, tag};
use crate::stats::Estimate;

use super::branching::gamma_lower_bound;
use super::density::upper_density;

fn count_survivors(
    graph: &FiniteGraph,
    params: &Params,
    which: Direction,
    init: &Configuration,
    t_max: f64,
    seed: u64,
    range: std::ops::Range<usize>,
) -> Result<usize> {
    let alive = run_replicates(graph, params, which, seed, range, |engine, rng| {
        engine.reset(init).expect("initial configuration sized to graph");
        engine.run(t_max, rng, |_, _, _, _| {}).extinct_at.is_none()
    })?;
    Ok(alive.into_iter().filter(|&a| a).count())
}

/// Fraction of replicates with some active site at `t_max`.
pub fn survival_probability(spec: &SurvivalSpec, params: &Params, seed: u64) -> Result<Estimate> {
    spec.validate()?;
    let graph = FiniteGraph::build_lattice(&spec.lattice)?;
    let init = spec.initial.build(&graph)?;
    let seed = derive_seed(seed, &[tag("survival")]);
    let alive = count_survivors(
        &graph,
        params,
        spec.direction,
        &init,
        spec.t_max,
        seed,
        0..spec.replicates,
    )?;
    Ok(Estimate::proportion(alive, spec.replicates, spec.confidence))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BisectionConfig {
    /// Survival threshold.
    pub theta: f64,
    /// First lambda tried when searching for an upper bracket.
    pub initial_lambda: f64,
    /// Give up looking for survival above this lambda.
    pub ceiling: f64,
    /// Stop once `hi - lo` is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Replicates per probe; doubled while the interval straddles `theta`.
    pub replicates: usize,
    pub max_replicates: usize,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            initial_lambda: 1.0,
            ceiling: 64.0,
            tolerance: 0.05,
            max_iterations: 30,
            replicates: 400,
            max_replicates: 3200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeClass {
    Below,
    Above,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub lambda: f64,
    pub estimate: Estimate,
    pub class: ProbeClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalBracket {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub lo_estimate: Estimate,
    pub hi_estimate: Estimate,
    pub iterations: usize,
    /// `hi - lo <= tolerance` was reached.
    pub converged: bool,
    pub probes: Vec<Probe>,
}

struct Prober<'a> {
    graph: FiniteGraph,
    init: Configuration,
    spec: &'a SurvivalSpec,
    config: &'a BisectionConfig,
    gamma: Maturation,
    delta: f64,
    seed: u64,
    probes: Vec<Probe>,
}

impl Prober<'_> {
    fn probe(&mut self, lambda: f64) -> Result<Probe> {
        let params = Params {
            lambda,
            gamma: self.gamma,
            delta: self.delta,
        }
        .validated()?;
        // same lambda, same replicate streams
        let seed = derive_seed(self.seed, &[tag("probe"), lambda.to_bits()]);
        let mut n = 0;
        let mut alive = 0;
        let mut target = self.config.replicates.max(1);
        loop {
            alive += count_survivors(
                &self.graph,
                &params,
                self.spec.direction,
                &self.init,
                self.spec.t_max,
                seed,
                n..target,
            )?;
            n = target;
            let estimate = Estimate::proportion(alive, n, self.spec.confidence);
            let class = if estimate.lower > self.config.theta {
                ProbeClass::Above
            } else if estimate.upper < self.config.theta {
                ProbeClass::Below
            } else {
                ProbeClass::Inconclusive
            };
            if class != ProbeClass::Inconclusive || 2 * n > self.config.max_replicates {
                let p = Probe {
                    lambda,
                    estimate,
                    class,
                };
                self.probes.push(p);
                return Ok(p);
            }
            target = 2 * n;
        }
    }
}

/// Bracket the lambda at which the finite-size survival probability crosses
/// `theta`. Both ends of the bracket are classified with intervals that
/// exclude `theta`.
pub fn critical_lambda(
    gamma: Maturation,
    delta: f64,
    spec: &SurvivalSpec,
    config: &BisectionConfig,
    seed: u64,
) -> Result<CriticalBracket> {
    spec.validate()?;
    if !(config.theta > 0.0 && config.theta < 1.0) {
        return Err(Error::Param(format!("theta must lie in (0, 1), got {}", config.theta)));
    }
    if !(config.initial_lambda > 0.0 && config.tolerance > 0.0) {
        return Err(Error::Param("initial_lambda and tolerance must be positive".into()));
    }
    let graph = FiniteGraph::build_lattice(&spec.lattice)?;
    let init = spec.initial.build(&graph)?;
    let mut prober = Prober {
        graph,
        init,
        spec,
        config,
        gamma,
        delta,
        seed: derive_seed(seed, &[tag("critical")]),
        probes: Vec::new(),
    };

    let mut lo = prober.probe(0.0)?;
    if lo.class != ProbeClass::Below {
        return Err(Error::Param(format!(
            "survival at lambda = 0 is not below theta = {}; increase t_max",
            config.theta
        )));
    }
    let mut lambda = config.initial_lambda;
    let mut hi = loop {
        if lambda > config.ceiling {
            return Err(Error::NoSurvivalBelowCeiling {
                ceiling: config.ceiling,
            });
        }
        let p = prober.probe(lambda)?;
        match p.class {
            ProbeClass::Above => break p,
            ProbeClass::Below => lo = p,
            ProbeClass::Inconclusive => {}
        }
        lambda *= 2.0;
    };

    let mut iterations = 0;
    while hi.lambda - lo.lambda > config.tolerance && iterations < config.max_iterations {
        iterations += 1;
        let p = prober.probe(0.5 * (lo.lambda + hi.lambda))?;
        match p.class {
            ProbeClass::Above => hi = p,
            ProbeClass::Below => lo = p,
            ProbeClass::Inconclusive => break,
        }
    }
    Ok(CriticalBracket {
        lambda_lo: lo.lambda,
        lambda_hi: hi.lambda,
        lo_estimate: lo.estimate,
        hi_estimate: hi.estimate,
        iterations,
        converged: hi.lambda - lo.lambda <= config.tolerance,
        probes: prober.probes,
    })
}

/// Grid settings for [`phase_diagram`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    /// Lattice for survival runs; density runs use the same lattice with
    /// `density_boundary`.
    pub lattice: LatticeSpec,
    #[serde(default = "torus")]
    pub density_boundary: Boundary,
    pub t_max: f64,
    pub replicates: usize,
    #[serde(default = "theta")]
    pub theta: f64,
    #[serde(default = "confidence")]
    pub confidence: f64,
}

fn torus() -> Boundary {
    Boundary::Torus
}
fn theta() -> f64 {
    DEFAULT_THETA
}
fn confidence() -> f64 {
    0.95
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub lambda: f64,
    pub gamma: Maturation,
    pub delta: f64,
    pub survival: Estimate,
    pub density: Estimate,
    /// The survival interval contains `theta`: the empirical boundary band.
    pub boundary_band: bool,
    /// `gamma < 1/(2M - 1)`, where extinction is certain.
    pub below_gamma_bound: bool,
}

/// Survival and upper density at every grid point, ordered by gamma then
/// lambda.
pub fn phase_diagram(
    delta: f64,
    lambdas: &[f64],
    gammas: &[Maturation],
    spec: &PhaseSpec,
    seed: u64,
) -> Result<Vec<PhasePoint>> {
    let survival_spec = SurvivalSpec {
        lattice: spec.lattice,
        initial: super::InitialCondition::SingleSite,
        t_max: spec.t_max,
        replicates: spec.replicates,
        direction: Direction::Forward,
        confidence: spec.confidence,
    };
    survival_spec.validate()?;
    let density_spec = SurvivalSpec {
        lattice: spec.lattice.with_boundary(spec.density_boundary),
        initial: super::InitialCondition::AllMature,
        ..survival_spec.clone()
    };
    let max_degree = FiniteGraph::build_lattice(&spec.lattice)?.max_degree();
    let bound = if max_degree > 0 {
        let b = gamma_lower_bound(max_degree)?;
        *b.numer() as f64 / *b.denom() as f64
    } else {
        f64::INFINITY
    };
    let mut out = Vec::with_capacity(lambdas.len() * gammas.len());
    for &gamma in gammas {
        for &lambda in lambdas {
            let params = Params { lambda, gamma, delta }.validated()?;
            let gamma_bits = match gamma {
                Maturation::Rate(g) => g.to_bits(),
                Maturation::Instant => u64::MAX,
            };
            let point_seed = derive_seed(seed, &[tag("phase"), lambda.to_bits(), gamma_bits]);
            let survival = survival_probability(&survival_spec, &params, point_seed)?;
            let density = upper_density(&params, &density_spec, point_seed)?.active;
            let below_gamma_bound = matches!(gamma, Maturation::Rate(g) if g < bound);
            out.push(PhasePoint {
                lambda,
                gamma,
                delta,
                survival,
                density,
                boundary_band: survival.contains(spec.theta),
                below_gamma_bound,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::InitialCondition;

    #[test]
    fn no_births_no_survival() {
        let spec = SurvivalSpec::new(LatticeSpec::line(10), 20.0, 200);
        let p = Params::new(0.0, 1.0, 0.0).unwrap();
        let e = survival_probability(&spec, &p, 1).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn short_horizon_all_survive_from_all_mature() {
        let spec = SurvivalSpec::new(LatticeSpec::line(10), 0.01, 50).with_initial(InitialCondition::AllMature);
        let p = Params::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(survival_probability(&spec, &p, 1).unwrap().mean, 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = SurvivalSpec::new(LatticeSpec::line(20), 10.0, 300);
        let p = Params::new(3.0, 3.0, 0.0).unwrap();
        assert_eq!(
            survival_probability(&spec, &p, 5).unwrap(),
            survival_probability(&spec, &p, 5).unwrap()
        );
    }

    #[test]
    fn bracket_not_found_below_gamma_bound() {
        let spec = SurvivalSpec::new(LatticeSpec::line(20), 30.0, 100);
        let config = BisectionConfig {
            ceiling: 40.0,
            initial_lambda: 5.0,
            max_replicates: 200,
            ..Default::default()
        };
        let err = critical_lambda(Maturation::Rate(0.2), 0.0, &spec, &config, 3).unwrap_err();
        assert_eq!(err, Error::NoSurvivalBelowCeiling { ceiling: 40.0 });
    }

    #[test]
    fn contact_bracket_is_sane() {
        let spec = SurvivalSpec::new(LatticeSpec::line(30), 30.0, 200);
        let config = BisectionConfig {
            tolerance: 0.25,
            ..Default::default()
        };
        let b = critical_lambda(Maturation::Instant, 0.0, &spec, &config, 7).unwrap();
        assert!(b.lambda_lo < b.lambda_hi);
        assert!(b.lo_estimate.upper < config.theta);
        assert!(b.hi_estimate.lower > config.theta);
        assert!(b.lambda_hi < 4.0, "{b:?}");
    }

    #[test]
    fn phase_grid_shape_and_gamma_bound_row() {
        let spec = PhaseSpec {
            lattice: LatticeSpec::line(15),
            density_boundary: Boundary::Torus,
            t_max: 15.0,
            replicates: 100,
            theta: DEFAULT_THETA,
            confidence: 0.95,
        };
        let gammas = [Maturation::Rate(0.2), Maturation::Rate(5.0)];
        let lambdas = [1.0, 4.0, 8.0];
        let points = phase_diagram(0.0, &lambdas, &gammas, &spec, 2).unwrap();
        assert_eq!(points.len(), 6);
        assert_eq!(points[0].gamma, Maturation::Rate(0.2));
        assert_eq!(points[1].lambda, 4.0);
        for p in &points[..3] {
            assert!(p.below_gamma_bound);
        }
        assert!(!points[3].below_gamma_bound);
    }
}

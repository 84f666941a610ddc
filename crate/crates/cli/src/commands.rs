use anyhow::Result;
use serde_json::json;
use twostage::checks::duality_trials;
use twostage::ctmc::CtmcSimulator;
use twostage::estimators::{
    branching_offspring_bound_check, critical_lambda, edge_speed, maturation_probability_mc, offspring_expectation_mc,
    phase_diagram, survival_probability, upper_density, EdgeSpeedSpec, PhaseSpec,
};
use twostage::params::Maturation;
use twostage::rng::{derive_seed, rng_from_seed, tag};
use twostage::{Boundary, Direction, EventSet, FiniteGraph, Params};

use crate::config::{CommandKind, ExperimentConfig, SimulateEngine};
use crate::output::Output;
use crate::Outcome;

fn gamma_bits(g: Maturation) -> u64 {
    match g {
        Maturation::Rate(r) => r.to_bits(),
        Maturation::Instant => u64::MAX,
    }
}

/// Seed for one grid point: depends on the point, not on its position.
fn point_seed(config: &ExperimentConfig, label: &str, p: &Params) -> u64 {
    derive_seed(
        config.seed,
        &[tag(label), p.lambda.to_bits(), gamma_bits(p.gamma), p.delta.to_bits()],
    )
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Forward => "forward",
        Direction::Dual => "dual",
    }
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

pub fn run(command: CommandKind, config: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Output::create(command, config)?;
    let (summary, success) = match command {
        CommandKind::Simulate => simulate(config, &mut out)?,
        CommandKind::Survival => survival(config, &mut out)?,
        CommandKind::Critical => critical(config, &mut out)?,
        CommandKind::EdgeSpeed => edge(config, &mut out)?,
        CommandKind::Density => density(config, &mut out)?,
        CommandKind::PhaseDiagram => phase(config, &mut out)?,
        CommandKind::DualityTest => duality(config, &mut out)?,
        CommandKind::Offspring => offspring(config, &mut out)?,
    };
    Ok(Outcome {
        command,
        files: out.into_files(),
        summary,
        success,
    })
}

fn simulate(config: &ExperimentConfig, out: &mut Output) -> Result<(String, bool)> {
    let params = config.params()?;
    let graph = FiniteGraph::build_lattice(&config.lattice)?;
    let init = config.initial.build(&graph)?;
    let seed = derive_seed(config.seed, &[tag("simulate")]);
    let which = config.direction;
    let mut lines = vec![
        out.meta_record(),
        json!({
            "record": "params",
            "lambda": params.lambda,
            "gamma": params.gamma,
            "delta": params.delta,
            "direction": which,
            "engine": config.simulate.engine,
            "t_max": config.t_max,
        }),
        json!({
            "record": "graph",
            "sites": graph.site_count(),
            "directed_edges": graph.directed_edge_count(),
            "max_degree": graph.max_degree(),
            "lattice": config.lattice,
        }),
        json!({ "record": "initial", "config": init.to_string() }),
    ];
    let mut changes = Vec::new();
    if config.t_max > 0.0 {
        match config.simulate.engine {
            SimulateEngine::Graphical => {
                let set = EventSet::sample(&graph, &params, config.t_max, seed)?;
                let tr = match which {
                    Direction::Forward => set.evolve_forward(&init, config.t_max)?,
                    Direction::Dual => set.evolve_dual(&init, config.t_max)?,
                };
                changes = tr.changes;
            }
            SimulateEngine::Ctmc => {
                let mut sim = CtmcSimulator::new(&graph, params, which, &init)?;
                let mut rng = rng_from_seed(seed);
                let mut t = 0.0;
                // contact mode starts from promoted juveniles
                for (x, (&a, &b)) in init.states().iter().zip(sim.state().states()).enumerate() {
                    if a != b {
                        changes.push(twostage::Change {
                            time: 0.0,
                            site: x,
                            from: a,
                            to: b,
                        });
                    }
                }
                loop {
                    let before = sim.state().clone();
                    let Some((wait, tr)) = sim.step(&mut rng) else { break };
                    t += wait;
                    if t > config.t_max {
                        break;
                    }
                    changes.push(twostage::Change {
                        time: t,
                        site: tr.site,
                        from: before.get(tr.site),
                        to: tr.to,
                    });
                }
            }
        }
    }
    let n = changes.len();
    for c in changes {
        lines.push(serde_json::to_value(c)?);
    }
    let path = out.jsonl_values(&lines)?;
    Ok((format!("{n} changes written to {}\n", path.display()), true))
}

fn survival(config: &ExperimentConfig, out: &mut Output) -> Result<(String, bool)> {
    let spec = config.survival_spec();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut summary = String::new();
    for p in config.grid_params()? {
        let e = survival_probability(&spec, &p, point_seed(config, "survival", &p))?;
        rows.push(vec![
            s(p.lambda),
            s(p.gamma),
            s(p.delta),
            s(direction_name(spec.direction)),
            s(spec.t_max),
            s(e.mean),
            s(e.std_error),
            s(e.lower),
            s(e.upper),
            s(e.replicates),
        ]);
        summary += &format!(
            "lambda={} gamma={} delta={}: survival {:.4} +/- {:.4}\n",
            p.lambda, p.gamma, p.delta, e.mean, e.std_error
        );
        records.push(json!({ "record": "survival", "params": p, "estimate": e }));
    }
    out.csv(
        &[
            "lambda",
            "gamma",
            "delta",
            "direction",
            "t_max",
            "survival_mean",
            "survival_se",
            "survival_lower",
            "survival_upper",
            "replicates",
        ],
        &rows,
    )?;
    out.jsonl(&records)?;
    Ok((summary, true))
}

fn critical(config: &ExperimentConfig, out: &mut Output) -> Result<(String, bool)> {
    let spec = config.survival_spec();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut summary = String::new();
    for gamma in config.gammas() {
        let seed = derive_seed(
            config.seed,
            &[tag("critical"), gamma_bits(gamma), config.params.delta.to_bits()],
        );
        let b = critical_lambda(gamma, config.params.delta, &spec, &config.bisection, seed)?;
        rows.push(vec![
            s(gamma),
            s(config.params.delta),
            s(b.lambda_lo),
            s(b.lambda_hi),
            s(b.lo_estimate.mean),
            s(b.lo_estimate.upper),
            s(b.hi_estimate.mean),
            s(b.hi_estimate.lower),
            s(b.converged),
            s(b.iterations),
        ]);
        summary += &format!("gamma={gamma}: lambda_c in [{}, {}]\n", b.lambda_lo, b.lambda_hi);
        records.push(json!({ "record": "critical", "gamma": gamma, "delta": config.params.delta, "bracket": b }));
    }
    out.csv(
        &[
            "gamma",
            "delta",
            "lambda_lo",
            "lambda_hi",
            "lo_survival",
            "lo_upper",
            "hi_survival",
            "hi_lower",
            "converged",
            "iterations",
        ],
        &rows,
    )?;
    out.jsonl(&records)?;
    Ok((summary, true))
}

fn edge(config: &ExperimentConfig, out: &mut Output) -> Result<(String, bool)> {
    let spec = EdgeSpeedSpec {
        half_extent: config.lattice.half_extent,
        range: config.lattice.range,
        t_max: config.t_max,
        replicates: config.replicates,
        side: config.edge.side,
        confidence: config.confidence,
    };
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut summary = String::new();
    for p in config.grid_params()? {
        let e = edge_speed(&p, &spec, point_seed(config, "edge-speed", &p))?;
        rows.push(vec![
            s(p.lambda),
            s(p.gamma),
            s(p.delta),
            s(e.alpha.mean),
            s(e.alpha.std_error),
            s(e.truncated_fraction),
            s(e.alpha.replicates),
        ]);
        summary += &format!(
            "lambda={} gamma={} delta={}: alpha {:.4} in [{:.4}, {:.4}]\n",
            p.lambda, p.gamma, p.delta, e.alpha.mean, e.alpha.lower, e.alpha.upper
        );
        records.push(json!({ "record": "edge_speed", "params": p, "side": spec.side, "estimate": e }));
    }
    out.csv(
        &[
            "lambda",
            "gamma",
            "delta",
            "alpha_mean",
            "alpha_se",
            "truncated_fraction",
            "replicates",
        ],
        &rows,
    )?;
    out.jsonl(&records)?;
    Ok((summary, true))
}

fn density(config: &ExperimentConfig, out: &mut Output) -> Result<(String, bool)> {
    let spec = config.survival_spec();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut summary = String::new();
    for p in config.grid_params()? {
        let d = upper_density(&p, &spec, point_seed(config, "density", &p))?;
        rows.push(vec![
            s(p.lambda),
            s(p.gamma),
            s(p.delta),
            s(direction_name(spec.direction)),
            s(spec.t_max),
            s(d.active.mean),
            s(d.active.std_error),
            s(d.mature.mean),
            s(d.mature.std_error),
            s(d.active.replicates),
        ]);
        summary += &format!(
            "lambda={} gamma={} delta={}: density {:.4} +/- {:.4}\n",
            p.lambda, p.gamma, p.delta, d.active.mean, d.active.std_error
        );
        records.push(json!({ "record": "density", "params": p, "estimate": d }));
    }
    out.csv(
        &[
            "lambda",
            "gamma",
            "delta",
            "direction",
            "t_max",
            "density_mean",
            "density_se",
            "mature_mean",
            "mature_se",
            "replicates",
        ],
        &rows,
    )?;
    out.jsonl(&records)?;
    Ok((summary, true))
}

fn phase(config: &ExperimentConfig, out: &mut Output) -> Result<(String, bool)> {
    let spec = PhaseSpec {
        lattice: config.lattice,
        density_boundary: Boundary::Torus,
        t_max: config.t_max,
        replicates: config.replicates,
        theta: config.theta,
        confidence: config.confidence,
    };
    let points = phase_diagram(
        config.params.delta,
        &config.lambdas(),
        &config.gammas(),
        &spec,
        config.seed,
    )?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                s(p.lambda),
                s(p.gamma),
                s(p.delta),
                s(p.survival.mean),
                s(p.survival.std_error),
                s(p.density.mean),
                s(p.density.std_error),
                s(p.survival.replicates),
            ]
        })
        .collect();
    out.csv(
        &[
            "lambda",
            "gamma",
            "delta",
            "survival_mean",
            "survival_se",
            "density_mean",
            "density_se",
            "replicates",
        ],
        &rows,
    )?;
    out.jsonl(&points)?;
    let band = points.iter().filter(|p| p.boundary_band).count();
    Ok((
        format!("{} grid points, {band} in the boundary band\n", points.len()),
        true,
    ))
}

fn duality(config: &ExperimentConfig, out: &mut Output) -> Result<(String, bool)> {
    let d = config.duality_test;
    let report = duality_trials(d.trials, d.max_sites, d.horizon, config.seed);
    out.csv(
        &["trials", "violations", "max_sites", "horizon"],
        &[vec![
            s(report.trials),
            s(report.violations),
            s(d.max_sites),
            s(d.horizon),
        ]],
    )?;
    out.jsonl(&[&report])?;
    let mut summary = format!("trials: {}\nviolations: {}\n", report.trials, report.violations);
    if let Some(first) = &report.first_violation {
        summary += &format!("first violation: {first}\n");
    }
    Ok((summary, report.violations == 0))
}

fn offspring(config: &ExperimentConfig, out: &mut Output) -> Result<(String, bool)> {
    let sample = offspring_expectation_mc(config.replicates, config.seed, config.confidence)?;
    let params = config.params()?;
    let max_degree = FiniteGraph::build_lattice(&config.lattice)?.max_degree().max(1);
    let star = branching_offspring_bound_check(&params, max_degree, config.replicates, config.seed)?;
    let maturation = if params.contact_mode() {
        None
    } else {
        Some(maturation_probability_mc(
            &params,
            config.replicates,
            config.seed,
            config.confidence,
        )?)
    };
    let n = config.replicates as f64;
    let rows: Vec<Vec<String>> = sample
        .counts
        .iter()
        .enumerate()
        .map(|(k, &c)| vec![s(k), s(c), s(c as f64 / n), s(0.5f64.powi(k as i32 + 1))])
        .collect();
    out.csv(&["k", "count", "fraction", "geometric"], &rows)?;
    out.jsonl_values(&[
        out.meta_record(),
        json!({ "record": "offspring", "sample": sample }),
        json!({ "record": "star_check", "params": params, "max_degree": max_degree, "check": star }),
        json!({ "record": "maturation", "params": params, "estimate": maturation }),
    ])?;
    let mut summary = format!(
        "E N_X = {:.4} +/- {:.4}, P(N_X = 0) = {:.4}\nstar offspring {:.4} (bound {:.4})\n",
        sample.mean.mean, sample.mean.std_error, sample.zero_fraction.mean, star.offspring.mean, star.bound
    );
    if let Some(m) = maturation {
        summary += &format!("maturation before death: {:.4} +/- {:.4}\n", m.mean, m.std_error);
    }
    Ok((summary, true))
}

use serde::{Deserialize, Serialize};

use super::{origin, run_replicates};
use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::graph::{Boundary, FiniteGraph, LatticeSpec};
use crate::params::{Direction, Params};
use crate::rng::{derive_seed, tag};
use crate::stats::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSide {
    /// Start mature on `x <= 0`, track the rightmost active site.
    #[default]
    Right,
    /// Start mature on `x >= 0`, track the leftmost active site.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpeedSpec {
    pub half_extent: usize,
    #[serde(default = "one")]
    pub range: usize,
    pub t_max: f64,
    pub replicates: usize,
    #[serde(default)]
    pub side: EdgeSide,
    #[serde(default = "confidence")]
    pub confidence: f64,
}

fn one() -> usize {
    1
}
fn confidence() -> f64 {
    0.95
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpeed {
    /// Mean of `edge(t_max) / t_max`.
    pub alpha: Estimate,
    /// Replicates whose edge reached the far wall of the box.
    pub truncated_fraction: f64,
    /// Replicates that died out; their edge counts as the near wall.
    pub empty_fraction: f64,
}

/// Edge position over time for a half-line of mature sites on the box
/// `[-L, L]`. An empty configuration puts the edge at the near wall (`-L` for
/// the right edge), so dying runs pull the estimate down instead of being
/// dropped.
pub fn edge_speed(params: &Params, spec: &EdgeSpeedSpec, seed: u64) -> Result<EdgeSpeed> {
    if !(spec.t_max.is_finite() && spec.t_max > 0.0) || spec.replicates == 0 {
        return Err(Error::Param(
            "edge speed needs t_max > 0 and at least one replicate".into(),
        ));
    }
    let lattice = LatticeSpec::new(1, spec.half_extent, spec.range, Boundary::Box);
    let graph = FiniteGraph::build_lattice(&lattice)?;
    let l = spec.half_extent as i64;
    let (sites, wall, far) = match spec.side {
        EdgeSide::Right => (graph.half_line_sites()?, -l, l),
        EdgeSide::Left => (graph.positive_half_line_sites()?, l, -l),
    };
    let init = Configuration::mature_on(&graph, &sites)?;
    let coords: Vec<i64> = (0..graph.site_count())
        .map(|x| graph.coord_1d(x))
        .collect::<Result<_>>()?;
    let seed = derive_seed(seed, &[tag("edge"), spec.side as u64]);
    let t_max = spec.t_max;
    let runs = run_replicates(
        &graph,
        params,
        Direction::Forward,
        seed,
        0..spec.replicates,
        |engine, rng| {
            engine.reset(&init).expect("sized to graph");
            let mut truncated = coords
                .iter()
                .zip(init.states())
                .any(|(&c, s)| s.is_active() && c == far);
            engine.run(t_max, rng, |_, x, _, to| {
                if to.is_active() && coords[x] == far {
                    truncated = true;
                }
            });
            let active = engine.active_sites().map(|x| coords[x]);
            let edge = match spec.side {
                EdgeSide::Right => active.max(),
                EdgeSide::Left => active.min(),
            };
            (edge.unwrap_or(wall) as f64 / t_max, truncated, edge.is_none())
        },
    )?;
    let n = runs.len() as f64;
    let samples: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Ok(EdgeSpeed {
        alpha: Estimate::from_samples(&samples, spec.confidence),
        truncated_fraction: runs.iter().filter(|r| r.1).count() as f64 / n,
        empty_fraction: runs.iter().filter(|r| r.2).count() as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    /// Largest sup-norm distance from the origin of any site ever active.
    pub width: u64,
    /// Extinction time, or `t_max` if still alive.
    pub lifetime: f64,
    /// Some active site touched the boundary of the box.
    pub hit_boundary: bool,
    /// Still alive at `t_max`.
    pub hit_horizon: bool,
}

impl ClusterRecord {
    pub fn truncated(&self) -> bool {
        self.hit_boundary || self.hit_horizon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    /// Mean width over the non-truncated replicates, if there are any.
    pub mean_width: Option<Estimate>,
    pub truncated_fraction: f64,
    pub records: Vec<ClusterRecord>,
}

/// Width of the active cluster of a single mature site at the origin of the
/// box `lattice` (free edges).
pub fn cluster_width(
    params: &Params,
    lattice: &LatticeSpec,
    t_max: f64,
    replicates: usize,
    seed: u64,
) -> Result<ClusterSummary> {
    if !(t_max.is_finite() && t_max > 0.0) || replicates == 0 {
        return Err(Error::Param(
            "cluster width needs t_max > 0 and at least one replicate".into(),
        ));
    }
    let lattice = lattice.with_boundary(Boundary::Box);
    let graph = FiniteGraph::build_lattice(&lattice)?;
    let o = origin(&graph);
    let init = Configuration::single_site(&graph, o)?;
    let dist: Vec<u64> = (0..graph.site_count())
        .map(|x| graph.lattice_distance(o, x).expect("lattice graph"))
        .collect();
    let edge = lattice.half_extent as u64;
    let seed = derive_seed(seed, &[tag("cluster")]);
    let records = run_replicates(
        &graph,
        params,
        Direction::Forward,
        seed,
        0..replicates,
        |engine, rng| {
            engine.reset(&init).expect("sized to graph");
            let mut width = 0;
            let out = engine.run(t_max, rng, |_, x, _, to| {
                if to.is_active() {
                    width = width.max(dist[x]);
                }
            });
            ClusterRecord {
                width,
                lifetime: out.extinct_at.unwrap_or(t_max),
                hit_boundary: width >= edge,
                hit_horizon: out.extinct_at.is_none(),
            }
        },
    )?;
    let kept: Vec<f64> = records
        .iter()
        .filter(|r| !r.truncated())
        .map(|r| r.width as f64)
        .collect();
    let truncated_fraction = 1.0 - kept.len() as f64 / records.len() as f64;
    Ok(ClusterSummary {
        mean_width: (!kept.is_empty()).then(|| Estimate::from_samples(&kept, 0.95)),
        truncated_fraction,
        records,
    })
}

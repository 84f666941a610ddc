//! Finite bounded-degree graphs.
//!
//! Lattice graphs live on the box `[-L, L]^d` with the range-`r` sup-norm
//! neighborhood `{y : 0 < |y - x|_inf <= r}`, either with free edges
//! ([`Boundary::Box`]) or periodic ones ([`Boundary::Torus`]). Sites are
//! indexed row-major with the first coordinate most significant, so the site
//! at coordinates `c` has index `sum_i (c_i + L) * (2L+1)^(d-1-i)`.
//!
//! Adjacency is stored in compressed form: the out-edges of site `x` occupy
//! `offsets[x]..offsets[x+1]` of the edge arrays, and each directed edge knows
//! the id of its reverse.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `d * (2L+1)^d` for lattice construction.
pub const DEFAULT_SITE_BUDGET: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Free edges: sites outside the box simply do not exist.
    #[default]
    Box,
    /// Periodic edges.
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dimension: usize,
    pub half_extent: usize,
    pub range: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(dimension: usize, half_extent: usize, range: usize, boundary: Boundary) -> Self {
        Self {
            dimension,
            half_extent,
            range,
            boundary,
        }
    }

    /// Nearest-neighbor box on `[-L, L]`.
    pub fn line(half_extent: usize) -> Self {
        Self::new(1, half_extent, 1, Boundary::Box)
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn side(&self) -> usize {
        2 * self.half_extent + 1
    }

    /// Degree of a site far from any free boundary, `(2r+1)^d - 1`.
    pub fn interior_degree(&self) -> usize {
        (2 * self.range + 1).pow(self.dimension as u32) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    dimension: usize,
    coords: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    reverse: Vec<usize>,
    max_degree: usize,
    labels: Option<Labels>,
    lattice: Option<LatticeSpec>,
}

impl FiniteGraph {
    pub fn build_lattice(spec: &LatticeSpec) -> Result<Self> {
        Self::build_lattice_with_budget(spec, DEFAULT_SITE_BUDGET)
    }

    pub fn build_lattice_with_budget(spec: &LatticeSpec, budget: usize) -> Result<Self> {
        let d = spec.dimension;
        if d == 0 {
            return Err(Error::Lattice("dimension must be at least 1".into()));
        }
        if spec.range == 0 {
            return Err(Error::Lattice("range must be at least 1".into()));
        }
        let side = spec.side();
        let sites = (side as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        let cost = sites.saturating_mul(d as u128);
        if cost > budget as u128 {
            return Err(Error::SiteBudget { sites, budget });
        }
        if spec.boundary == Boundary::Torus && spec.range >= side {
            return Err(Error::TorusWrap {
                range: spec.range,
                side,
            });
        }
        let n = sites as usize;
        let l = spec.half_extent as i64;
        let r = spec.range as i64;

        let mut coords = Vec::with_capacity(n * d);
        for idx in 0..n {
            let mut rem = idx;
            let start = coords.len();
            coords.resize(start + d, 0);
            for k in (0..d).rev() {
                coords[start + k] = (rem % side) as i64 - l;
                rem /= side;
            }
        }

        // all offset vectors in {-r..r}^d except zero
        let span = (2 * r + 1) as usize;
        let mut offsets_list = Vec::new();
        for code in 0..span.pow(d as u32) {
            let mut rem = code;
            let mut off = vec![0i64; d];
            for k in (0..d).rev() {
                off[k] = (rem % span) as i64 - r;
                rem /= span;
            }
            if off.iter().any(|&o| o != 0) {
                offsets_list.push(off);
            }
        }

        let index_of = |c: &[i64]| -> usize { c.iter().fold(0usize, |acc, &ci| acc * side + (ci + l) as usize) };

        let mut lists = Vec::with_capacity(n);
        let mut buf = vec![0i64; d];
        for x in 0..n {
            let cx = &coords[x * d..(x + 1) * d];
            let mut nbrs = Vec::with_capacity(offsets_list.len());
            'off: for off in &offsets_list {
                for k in 0..d {
                    let mut c = cx[k] + off[k];
                    match spec.boundary {
                        Boundary::Box => {
                            if c < -l || c > l {
                                continue 'off;
                            }
                        }
                        Boundary::Torus => {
                            c = (c + l).rem_euclid(side as i64) - l;
                        }
                    }
                    buf[k] = c;
                }
                let y = index_of(&buf);
                if y != x {
                    nbrs.push(y);
                }
            }
            nbrs.sort_unstable();
            nbrs.dedup();
            lists.push(nbrs);
        }

        let mut g = Self::from_sorted_lists(lists);
        g.labels = Some(Labels { dimension: d, coords });
        g.lattice = Some(*spec);
        Ok(g)
    }

    /// Validate user-supplied neighbor lists. Lists may be given in any order;
    /// they are stored sorted.
    pub fn from_adjacency(lists: &[Vec<usize>]) -> Result<Self> {
        let n = lists.len();
        let mut sorted = Vec::with_capacity(n);
        for (x, list) in lists.iter().enumerate() {
            let mut l = list.clone();
            l.sort_unstable();
            for w in l.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::DuplicateNeighbor {
                        site: x,
                        neighbor: w[0],
                    });
                }
            }
            for &y in &l {
                if y >= n {
                    return Err(Error::NeighborOutOfRange {
                        site: x,
                        neighbor: y,
                        n,
                    });
                }
                if y == x {
                    return Err(Error::SelfLoop(x));
                }
            }
            sorted.push(l);
        }
        for (x, list) in sorted.iter().enumerate() {
            for &y in list {
                if sorted[y].binary_search(&x).is_err() {
                    return Err(Error::Asymmetric { from: x, to: y });
                }
            }
        }
        Ok(Self::from_sorted_lists(sorted))
    }

    fn from_sorted_lists(lists: Vec<Vec<usize>>) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for list in &lists {
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let mut reverse = vec![0; targets.len()];
        for x in 0..n {
            for e in offsets[x]..offsets[x + 1] {
                let y = targets[e];
                let k = targets[offsets[y]..offsets[y + 1]]
                    .binary_search(&x)
                    .expect("adjacency is symmetric");
                reverse[e] = offsets[y] + k;
            }
        }
        let max_degree = lists.iter().map(Vec::len).max().unwrap_or(0);
        Self {
            offsets,
            targets,
            reverse,
            max_degree,
            labels: None,
            lattice: None,
        }
    }

    pub fn path(n: usize) -> Self {
        let lists = (0..n)
            .map(|x| {
                let mut l = Vec::new();
                if x > 0 {
                    l.push(x - 1);
                }
                if x + 1 < n {
                    l.push(x + 1);
                }
                l
            })
            .collect();
        Self::from_sorted_lists(lists)
    }

    /// Cycle on `n >= 3` sites; smaller `n` degenerate to a path.
    pub fn cycle(n: usize) -> Self {
        if n < 3 {
            return Self::path(n);
        }
        let lists = (0..n)
            .map(|x| {
                let mut l = vec![(x + n - 1) % n, (x + 1) % n];
                l.sort_unstable();
                l
            })
            .collect();
        Self::from_sorted_lists(lists)
    }

    /// Star with center 0 and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let mut lists = vec![(1..=leaves).collect::<Vec<_>>()];
        lists.extend((0..leaves).map(|_| vec![0]));
        Self::from_sorted_lists(lists)
    }

    pub fn site_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.targets[self.offsets[x]..self.offsets[x + 1]]
    }

    /// Number of directed edges, i.e. twice the number of undirected ones.
    pub fn directed_edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Ids of the directed edges leaving `x`.
    pub fn out_edges(&self, x: usize) -> std::ops::Range<usize> {
        self.offsets[x]..self.offsets[x + 1]
    }

    pub fn edge_target(&self, e: usize) -> usize {
        self.targets[e]
    }

    /// Id of the directed edge pointing the other way.
    pub fn reverse_edge(&self, e: usize) -> usize {
        self.reverse[e]
    }

    /// Source site of directed edge `e` (binary search over offsets).
    pub fn edge_source(&self, e: usize) -> usize {
        self.offsets.partition_point(|&o| o <= e) - 1
    }

    /// All directed edges as `(source, target)` in edge-id order.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.site_count()).flat_map(move |x| self.neighbors(x).iter().map(move |&y| (x, y)))
    }

    pub fn lattice(&self) -> Option<&LatticeSpec> {
        self.lattice.as_ref()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    pub fn coords(&self, x: usize) -> Option<&[i64]> {
        self.labels
            .as_ref()
            .map(|l| &l.coords[x * l.dimension..(x + 1) * l.dimension])
    }

    /// Coordinate of a site on a one-dimensional labelled graph.
    pub fn coord_1d(&self, x: usize) -> Result<i64> {
        let labels = self.labels.as_ref().ok_or(Error::NoLabels)?;
        if labels.dimension != 1 {
            return Err(Error::NotOneDimensional);
        }
        Ok(labels.coords[x])
    }

    /// Site at the all-zero coordinate, if the graph is a lattice.
    pub fn origin(&self) -> Option<usize> {
        let spec = self.lattice?;
        let side = spec.side();
        let centre = spec.half_extent;
        Some((0..spec.dimension).fold(0, |acc, _| acc * side + centre))
    }

    /// Sup-norm distance between two lattice sites, wrapped on a torus.
    pub fn lattice_distance(&self, a: usize, b: usize) -> Option<u64> {
        let spec = self.lattice?;
        let ca = self.coords(a)?;
        let cb = self.coords(b)?;
        let side = spec.side() as i64;
        Some(
            ca.iter()
                .zip(cb)
                .map(|(&p, &q)| {
                    let diff = (p - q).unsigned_abs() as i64;
                    match spec.boundary {
                        Boundary::Box => diff,
                        Boundary::Torus => diff.min(side - diff),
                    }
                })
                .max()
                .unwrap_or(0) as u64,
        )
    }

    /// Indices of the sites with coordinate `<= 0` on a one-dimensional lattice.
    pub fn half_line_sites(&self) -> Result<Vec<usize>> {
        let labels = self.labels.as_ref().ok_or(Error::NoLabels)?;
        if labels.dimension != 1 {
            return Err(Error::NotOneDimensional);
        }
        Ok((0..self.site_count()).filter(|&x| labels.coords[x] <= 0).collect())
    }

    /// Indices of the sites with coordinate `>= 0` on a one-dimensional lattice.
    pub fn positive_half_line_sites(&self) -> Result<Vec<usize>> {
        let labels = self.labels.as_ref().ok_or(Error::NoLabels)?;
        if labels.dimension != 1 {
            return Err(Error::NotOneDimensional);
        }
        Ok((0..self.site_count()).filter(|&x| labels.coords[x] >= 0).collect())
    }

    /// Text form: `n=<count>` header, then one line of space-separated
    /// neighbor indices per site.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = format!("n={}\n", self.site_count());
        for x in 0..self.site_count() {
            let line: Vec<String> = self.neighbors(x).iter().map(|y| y.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

impl FromStr for FiniteGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .by_ref()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::Parse("missing header".into()))?;
        let n: usize = header
            .trim()
            .strip_prefix("n=")
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("site count: {e}")))?;
        let mut lists = Vec::with_capacity(n);
        for line in lines.take(n) {
            let list = line
                .split_whitespace()
                .map(|tok| tok.parse::<usize>().map_err(|e| Error::Parse(format!("{tok:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            lists.push(list);
        }
        // trailing sites with no neighbors may be given as missing lines
        lists.resize(n, Vec::new());
        Self::from_adjacency(&lists)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_symmetric(g: &FiniteGraph) {
        for x in 0..g.site_count() {
            assert!(!g.neighbors(x).contains(&x));
            for &y in g.neighbors(x) {
                assert!(g.neighbors(y).contains(&x));
            }
        }
        for e in 0..g.directed_edge_count() {
            let r = g.reverse_edge(e);
            assert_eq!(g.edge_source(r), g.edge_target(e));
            assert_eq!(g.edge_target(r), g.edge_source(e));
        }
    }

    #[test]
    fn path_box() {
        let g = FiniteGraph::build_lattice(&LatticeSpec::line(2)).unwrap();
        assert_eq!(g.site_count(), 5);
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(2), &[1, 3]);
        assert_eq!(g.coord_1d(0).unwrap(), -2);
        assert_eq!(g.origin(), Some(2));
        check_symmetric(&g);
    }

    #[test]
    fn cycle_torus() {
        let g = FiniteGraph::build_lattice(&LatticeSpec::line(2).with_boundary(Boundary::Torus)).unwrap();
        assert_eq!(g.site_count(), 5);
        assert!((0..5).all(|x| g.degree(x) == 2));
        assert_eq!(g.neighbors(0), &[1, 4]);
        check_symmetric(&g);
    }

    #[test]
    fn square_torus_degree_eight() {
        let g = FiniteGraph::build_lattice(&LatticeSpec::new(2, 3, 1, Boundary::Torus)).unwrap();
        assert_eq!(g.site_count(), 49);
        assert!((0..49).all(|x| g.degree(x) == 8));
        // brute-force count of the wrapped sup-norm ball
        for x in 0..49 {
            let count = (0..49)
                .filter(|&y| y != x && g.lattice_distance(x, y).unwrap() <= 1)
                .count();
            assert_eq!(count, 8);
        }
        check_symmetric(&g);
    }

    #[test]
    fn box_corner_degree_smaller() {
        let g = FiniteGraph::build_lattice(&LatticeSpec::new(2, 3, 2, Boundary::Box)).unwrap();
        let corner = 0;
        let origin = g.origin().unwrap();
        assert_eq!(g.degree(origin), 24);
        assert!(g.degree(corner) < g.degree(origin));
        assert_eq!(g.degree(corner), 8);
    }

    #[test]
    fn small_torus_dedups_wrapped_neighbors() {
        // side 3, range 2: every other site is a neighbor exactly once
        let g = FiniteGraph::build_lattice(&LatticeSpec::new(1, 1, 2, Boundary::Torus)).unwrap();
        assert!((0..3).all(|x| g.degree(x) == 2));
        check_symmetric(&g);
    }

    #[test]
    fn torus_wrap_error() {
        let err = FiniteGraph::build_lattice(&LatticeSpec::new(1, 1, 3, Boundary::Torus)).unwrap_err();
        assert_eq!(err, Error::TorusWrap { range: 3, side: 3 });
    }

    #[test]
    fn budget_error() {
        let spec = LatticeSpec::new(3, 100, 1, Boundary::Box);
        assert!(matches!(
            FiniteGraph::build_lattice_with_budget(&spec, 1000),
            Err(Error::SiteBudget { .. })
        ));
    }

    #[test]
    fn deterministic_build() {
        let spec = LatticeSpec::new(2, 4, 2, Boundary::Torus);
        assert_eq!(
            FiniteGraph::build_lattice(&spec).unwrap(),
            FiniteGraph::build_lattice(&spec).unwrap()
        );
    }

    #[test]
    fn adjacency_validation() {
        let g = FiniteGraph::from_adjacency(&[vec![1], vec![0]]).unwrap();
        assert_eq!(g.site_count(), 2);
        assert_eq!(g.max_degree(), 1);
        assert_eq!(
            FiniteGraph::from_adjacency(&[vec![1], vec![0, 1]]),
            Err(Error::SelfLoop(1))
        );
        assert_eq!(
            FiniteGraph::from_adjacency(&[vec![1], vec![]]),
            Err(Error::Asymmetric { from: 0, to: 1 })
        );
        assert_eq!(
            FiniteGraph::from_adjacency(&[vec![1, 1], vec![0]]),
            Err(Error::DuplicateNeighbor { site: 0, neighbor: 1 })
        );
    }

    #[test]
    fn half_line() {
        let g = FiniteGraph::build_lattice(&LatticeSpec::line(2)).unwrap();
        assert_eq!(g.half_line_sites().unwrap(), vec![0, 1, 2]);
        let single = FiniteGraph::build_lattice(&LatticeSpec::line(0)).unwrap();
        assert_eq!(single.half_line_sites().unwrap(), vec![0]);
        let adj = FiniteGraph::from_adjacency(&[vec![1], vec![0]]).unwrap();
        assert_eq!(adj.half_line_sites(), Err(Error::NoLabels));
    }

    #[test]
    fn adjacency_text() {
        let g = FiniteGraph::star(3);
        let text = g.to_adjacency_text();
        assert_eq!(text, "n=4\n1 2 3\n0\n0\n0\n");
        let back: FiniteGraph = text.parse().unwrap();
        assert_eq!(back.to_adjacency_text(), text);
        assert!("n=2\n1\n\n".parse::<FiniteGraph>().is_err());
        assert!("2\n1\n0\n".parse::<FiniteGraph>().is_err());
    }
}

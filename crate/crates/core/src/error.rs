use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice has {sites} sites, over the budget of {budget}")]
    SiteBudget { sites: u128, budget: usize },
    #[error("range {range} wraps onto itself on a torus of side {side}")]
    TorusWrap { range: usize, side: usize },
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("self-loop at site {0}")]
    SelfLoop(usize),
    #[error("asymmetric adjacency: {from} lists {to}, but {to} does not list {from}")]
    Asymmetric { from: usize, to: usize },
    #[error("duplicate neighbor {neighbor} in list of site {site}")]
    DuplicateNeighbor { site: usize, neighbor: usize },
    #[error("neighbor index {neighbor} of site {site} is out of range (n = {n})")]
    NeighborOutOfRange { site: usize, neighbor: usize, n: usize },
    #[error("graph has no coordinate labels")]
    NoLabels,
    #[error("graph is not one-dimensional")]
    NotOneDimensional,
    #[error("site {site} out of range (n = {n})")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("configuration lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("time {t} exceeds event horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },
    #[error("expected event count {expected:.0} exceeds cap {cap}")]
    EventBudget { expected: f64, cap: f64 },
    #[error("configuration is absorbing; no transition is enabled")]
    Absorbing,
    #[error("no survival detected up to the lambda ceiling {ceiling}")]
    NoSurvivalBelowCeiling { ceiling: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

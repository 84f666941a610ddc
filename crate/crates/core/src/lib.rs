//! Simulation and Monte Carlo estimation for the two-stage contact process
//! and its on-off dual on finite bounded-degree graphs.
//!
//! Sites are vacant (0), juvenile (1) or mature (2). Going forward, a vacant
//! site is colonised at rate `lambda` per mature neighbor, juveniles mature at
//! rate `gamma` and die at rate `1 + delta`, and mature sites die at rate 1.
//!
//! - [`graph`]: lattice boxes/tori and validated adjacency lists.
//! - [`configuration`]: states, the pointwise order, join and compatibility.
//! - [`graphical`]: sampled Poisson event sets, read upward by the forward
//!   process and downward by the dual.
//! - [`ctmc`]: an independent direct Markov chain simulator.
//! - [`engine`]: the fast active-set simulator behind the estimators.
//! - [`estimators`]: survival, critical values, edge speed, densities.

pub mod checks;
pub mod configuration;
pub mod ctmc;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod graphical;
pub mod params;
pub mod replicates;
pub mod rng;
pub mod stats;

pub use configuration::{Configuration, SiteState};
pub use error::{Error, Result};
pub use graph::{Boundary, FiniteGraph, LatticeSpec};
pub use graphical::{Change, Event, EventKind, EventSet, StreamRates, Trajectory};
pub use params::{Direction, Maturation, Params};
pub use stats::Estimate;

//! percolab: a simulation laboratory for bond percolation on uniform
//! random d-regular graphs in the critical window p = (1 + λ n^{−1/3})/(d−1).
//!
//! The crate provides:
//! - graph machinery and the degree-preserving 4-cycle switching,
//! - exact and approximate uniform samplers for G_{n,d} with enumeration
//!   oracles at tiny sizes,
//! - bond percolation with ground-truth component structure,
//! - the frontier exploration process that reveals percolation indicators
//!   one edge at a time, plus its two-phase stopping-time experiment,
//! - component metrics (sizes, exact diameters, lazy-walk mixing times),
//! - deterministic switching-count checks and Monte Carlo estimators for
//!   the frontier moment and component-growth bounds,
//! - a replicated, seed-reproducible experiment harness with JSON-lines
//!   and CSV persistence.

pub mod dsu;
pub mod experiments;
pub mod exploration;
pub mod graph;
pub mod metrics;
pub mod mixing;
pub mod percolation;
pub mod pool;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod verify;

pub use graph::{Multigraph, RegularGraph, SwitchingCycle};
pub use percolation::{critical_p, percolate, PercolationOutcome};
pub use rng::StreamKey;
